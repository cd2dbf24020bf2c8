#include "core/poison.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <unordered_set>

#include "core/corpus.hpp"
#include "core/parallel.hpp"
#include "core/paths.hpp"
#include "core/rng.hpp"

namespace fs = std::filesystem;

namespace badbox {

namespace {

void validate_spec(const Dataset& d, const AttackSpec& spec) {
    if (spec.attacked_class == spec.target_class)
        fail(ErrorCode::invalid_argument, "attacked and target class must differ");
    if (!d.categories.has_name(spec.attacked_class))
        fail(ErrorCode::not_found, "attacked class '" + spec.attacked_class +
                                       "' is not in the category table");
    if (!d.categories.has_name(spec.target_class))
        fail(ErrorCode::not_found,
             "target class '" + spec.target_class + "' is not in the category table");
    if (spec.poison_rate < 0.0 || spec.poison_rate > 1.0)
        fail(ErrorCode::invalid_argument, "poison_rate must be in [0, 1]");
    if (spec.trigger_alpha < 0.0 || spec.trigger_alpha > 1.0)
        fail(ErrorCode::invalid_argument, "trigger_alpha must be in [0, 1]");
    if (spec.trigger_width < 1 || spec.trigger_height < 1)
        fail(ErrorCode::invalid_argument, "trigger dimensions must be >= 1");
}

void validate_trigger_matches_spec(const AttackSpec& spec, const TriggerPattern& trig) {
    if (trig.width != spec.trigger_width || trig.height != spec.trigger_height)
        fail(ErrorCode::invalid_argument,
             "trigger pattern is " + std::to_string(trig.width) + "x" +
                 std::to_string(trig.height) + " but the attack spec declares " +
                 std::to_string(spec.trigger_width) + "x" + std::to_string(spec.trigger_height));
}

// image ids become file names; anything outside a safe charset is replaced
// and disambiguated with a short content hash.
std::string pixel_file_name(const std::string& image_id) {
    std::string safe = image_id;
    bool changed = false;
    for (char& c : safe) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        if (!ok) {
            c = '_';
            changed = true;
        }
    }
    if (changed) {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%08llx",
                      static_cast<unsigned long long>(fnv1a64(image_id) & 0xffffffffULL));
        safe += "-";
        safe += buf;
    }
    return safe + ".png";
}

struct StampStats {
    int stamped = 0;
    int cropped = 0;
};

// Stamps a trigger on every object accepted by `flagged`, in annotation
// order. Random placements consume exactly two uniforms per stamped object.
StampStats stamp_triggers(Image& pixels, const ImageRecord& rec,
                          const std::vector<char>& flagged, const TriggerPattern& trig,
                          double global_alpha, PlacementMode mode, DetRng& rng) {
    StampStats stats;
    for (std::size_t i = 0; i < rec.objects.size(); ++i) {
        if (!flagged[i]) continue;
        Placement where;
        if (mode == PlacementMode::random_location) {
            where.center_x = rng.next_real() * rec.width;
            where.center_y = rng.next_real() * rec.height;
        } else {
            where.center_x = rec.objects[i].cx;
            where.center_y = rec.objects[i].cy;
        }
        const BlendResult r = blend(pixels, trig, where, global_alpha);
        ++stats.stamped;
        if (r.cropped) ++stats.cropped;
    }
    return stats;
}

Image load_pixels_checked(const ImageRecord& rec) {
    ImageWithAlpha loaded = read_png(rec.pixel_path);
    if (loaded.image.width != rec.width || loaded.image.height != rec.height)
        fail(ErrorCode::invalid_argument,
             "pixel file '" + rec.pixel_path + "' is " + std::to_string(loaded.image.width) +
                 "x" + std::to_string(loaded.image.height) + " but the manifest says " +
                 std::to_string(rec.width) + "x" + std::to_string(rec.height));
    return std::move(loaded.image);
}

struct PerImageOutcome {
    ImageRecord record;
    std::vector<std::string> warnings;
    std::string error;
};

// Shared driver for all poisoning constructions: every image gets an
// outcome slot, so results and diagnostics aggregate in manifest order no
// matter how the work was scheduled.
template <typename ProcessFn>
PoisonOutput process_images(const Dataset& d, unsigned threads, ProcessFn&& process) {
    std::vector<PerImageOutcome> slots(d.images.size());
    parallel_for(d.images.size(), threads, [&](std::size_t i) {
        try {
            process(d.images[i], slots[i]);
        } catch (const std::exception& e) {
            slots[i].error = e.what();
        }
    });

    PoisonOutput out;
    std::string errors;
    for (auto& slot : slots) {
        if (!slot.error.empty()) {
            errors += (errors.empty() ? "" : "; ") + slot.error;
            continue;
        }
        out.dataset.images.push_back(std::move(slot.record));
        for (auto& w : slot.warnings) out.warnings.push_back(std::move(w));
    }
    if (!errors.empty())
        fail(ErrorCode::io, "poisoning failed for some images (partial outputs remain): " + errors);
    out.dataset.categories = d.categories;
    return out;
}

} // namespace

std::size_t selection_count(double rate, std::size_t universe) {
    if (rate <= 0.0 || universe == 0) return 0;
    const double t = rate * static_cast<double>(universe);
    const double snapped = std::round(t);
    // Snap near-integer products before ceiling so 0.1 * 150 stays 15.
    double k = (std::abs(t - snapped) < 1e-9 * std::max(1.0, t)) ? snapped : std::ceil(t);
    if (k < 1.0) k = 1.0;
    return std::min(static_cast<std::size_t>(k), universe);
}

PoisonPlan plan_na(const Dataset& d, const AttackSpec& spec) {
    validate_spec(d, spec);

    PoisonPlan plan;
    plan.spec = spec;
    if (spec.poison_rate <= 0.0) return plan;

    const std::vector<std::string> universe =
        images_with_class(d, d.categories.id_of(spec.attacked_class));
    if (universe.empty())
        fail(ErrorCode::invalid_argument,
             "poison_rate > 0 but no image contains a non-difficult '" + spec.attacked_class +
                 "' object");

    const std::size_t count = selection_count(spec.poison_rate, universe.size());

    // Partial Fisher-Yates over universe positions, then restored to
    // manifest order.
    std::vector<std::size_t> positions(universe.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
    DetRng rng(derive_seed(spec.master_seed, "na-selection"));
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.next_below(positions.size() - i);
        std::swap(positions[i], positions[j]);
    }
    positions.resize(count);
    std::sort(positions.begin(), positions.end());

    for (const std::size_t pos : positions) {
        const std::string& id = universe[pos];
        plan.selected_image_ids.push_back(id);
        plan.per_image_seeds[id] = derive_seed(spec.master_seed, id);
    }
    return plan;
}

PoisonOutput apply_plan(const Dataset& d, const PoisonPlan& plan, const TriggerPattern& trig,
                        const ApplyOptions& opts) {
    validate_spec(d, plan.spec);
    validate_trigger_matches_spec(plan.spec, trig);
    if (d.provenance)
        fail(ErrorCode::conflict, "dataset already carries attack provenance; refusing to poison twice");
    if (plan.per_image_seeds.size() != plan.selected_image_ids.size())
        fail(ErrorCode::invalid_argument, "plan seeds do not cover the selected set");

    std::unordered_set<std::string> selected;
    for (const auto& id : plan.selected_image_ids) {
        if (!d.find_image(id))
            fail(ErrorCode::invalid_argument,
                 "plan selects image '" + id + "' which is not in the dataset");
        if (!plan.per_image_seeds.count(id))
            fail(ErrorCode::invalid_argument, "plan lacks a seed for image '" + id + "'");
        selected.insert(id);
    }

    const int attacked_id = d.categories.id_of(plan.spec.attacked_class);
    const int target_id = d.categories.id_of(plan.spec.target_class);
    const std::string images_dir = normalize_abs((fs::path(opts.out_dir) / "images").string());
    fs::create_directories(images_dir);

    PoisonOutput out = process_images(
        d, opts.threads, [&](const ImageRecord& rec, PerImageOutcome& slot) {
            slot.record = rec;
            if (!selected.count(rec.image_id)) return;

            std::vector<char> flagged(rec.objects.size(), 0);
            for (std::size_t i = 0; i < rec.objects.size(); ++i)
                flagged[i] = !rec.objects[i].difficult &&
                             rec.objects[i].category_id == attacked_id;

            Image pixels = load_pixels_checked(rec);
            DetRng rng(plan.per_image_seeds.at(rec.image_id));
            const StampStats stats =
                stamp_triggers(pixels, rec, flagged, trig, plan.spec.trigger_alpha,
                               plan.spec.placement_mode, rng);
            if (stats.cropped > 0)
                slot.warnings.push_back("image '" + rec.image_id + "': " +
                                        std::to_string(stats.cropped) +
                                        " trigger(s) cropped at the image border");

            for (std::size_t i = 0; i < rec.objects.size(); ++i)
                if (flagged[i]) slot.record.objects[i].category_id = target_id;

            const std::string path =
                (fs::path(images_dir) / pixel_file_name(rec.image_id)).string();
            write_png(path, pixels);
            slot.record.pixel_path = path;
        });

    AttackProvenance prov;
    prov.kind = ProvenanceKind::na;
    prov.spec = plan.spec;
    prov.master_seed = plan.spec.master_seed;
    prov.selected_image_ids = plan.selected_image_ids;
    out.dataset.provenance = std::move(prov);
    return out;
}

PoisonOutput build_shadow(const Dataset& d_clean, const AttackSpec& spec,
                          const TriggerPattern& trig, const ApplyOptions& opts) {
    validate_spec(d_clean, spec);
    if (d_clean.provenance)
        fail(ErrorCode::conflict, "shadow construction expects a benign dataset");

    const std::vector<std::string> universe =
        images_with_class(d_clean, d_clean.categories.id_of(spec.attacked_class));
    if (universe.empty())
        fail(ErrorCode::invalid_argument,
             "dataset has no non-difficult '" + spec.attacked_class + "' objects");

    PoisonPlan plan;
    plan.spec = spec;
    plan.selected_image_ids = universe;
    for (const auto& id : universe) plan.per_image_seeds[id] = derive_seed(spec.master_seed, id);

    PoisonOutput out = apply_plan(d_clean, plan, trig, opts);
    out.dataset.provenance->kind = ProvenanceKind::shadow;
    return out;
}

TestVariants build_test_variants(const Dataset& d_test_benign, const AttackSpec& spec,
                                 const TriggerPattern& trig, const ApplyOptions& opts) {
    validate_spec(d_test_benign, spec);
    validate_trigger_matches_spec(spec, trig);
    if (d_test_benign.provenance)
        fail(ErrorCode::conflict, "test variants must be built from a benign dataset");

    TestVariants variants;
    variants.benign = d_test_benign;

    const int attacked_id = d_test_benign.categories.id_of(spec.attacked_class);
    const int target_id = d_test_benign.categories.id_of(spec.target_class);

    // Backdoored pixels: every image holding the attacked class, one
    // trigger per non-difficult attacked box.
    const std::vector<std::string> attacked_images = images_with_class(d_test_benign, attacked_id);
    const std::unordered_set<std::string> attacked_set(attacked_images.begin(),
                                                       attacked_images.end());
    const std::string backdoored_dir =
        normalize_abs((fs::path(opts.out_dir) / "images_backdoored").string());
    fs::create_directories(backdoored_dir);

    PoisonOutput backdoored = process_images(
        d_test_benign, opts.threads, [&](const ImageRecord& rec, PerImageOutcome& slot) {
            slot.record = rec;
            if (!attacked_set.count(rec.image_id)) return;

            std::vector<char> flagged(rec.objects.size(), 0);
            for (std::size_t i = 0; i < rec.objects.size(); ++i)
                flagged[i] =
                    !rec.objects[i].difficult && rec.objects[i].category_id == attacked_id;

            Image pixels = load_pixels_checked(rec);
            DetRng rng(derive_seed(spec.master_seed, rec.image_id));
            const StampStats stats = stamp_triggers(pixels, rec, flagged, trig,
                                                    spec.trigger_alpha, spec.placement_mode, rng);
            if (stats.cropped > 0)
                slot.warnings.push_back("image '" + rec.image_id + "': " +
                                        std::to_string(stats.cropped) +
                                        " trigger(s) cropped at the image border");

            for (std::size_t i = 0; i < rec.objects.size(); ++i)
                if (flagged[i]) slot.record.objects[i].category_id = target_id;

            const std::string path =
                (fs::path(backdoored_dir) / pixel_file_name(rec.image_id)).string();
            write_png(path, pixels);
            slot.record.pixel_path = path;
        });

    AttackProvenance prov;
    prov.kind = ProvenanceKind::test_variant;
    prov.spec = spec;
    prov.master_seed = spec.master_seed;
    prov.selected_image_ids = attacked_images;

    variants.backdoored = std::move(backdoored.dataset);
    variants.backdoored.provenance = prov;
    for (auto& w : backdoored.warnings) variants.warnings.push_back(std::move(w));

    // Hybrid: the backdoored pixels with the benign annotations.
    variants.backdoored_benign = d_test_benign;
    for (std::size_t i = 0; i < variants.backdoored_benign.images.size(); ++i)
        variants.backdoored_benign.images[i].pixel_path =
            variants.backdoored.images[i].pixel_path;
    variants.backdoored_benign.provenance = prov;

    // Partial variant: five seeded categories, trigger at every one of
    // their box centers, labels untouched.
    std::vector<int> cat_ids;
    for (const auto& c : d_test_benign.categories.entries()) cat_ids.push_back(c.id);
    std::size_t draw = 5;
    if (cat_ids.size() < draw) {
        draw = cat_ids.size();
        variants.warnings.push_back("category table has fewer than 5 entries; using all " +
                                    std::to_string(draw));
    }
    DetRng cat_rng(derive_seed(spec.master_seed, "part-attack-categories"));
    for (std::size_t i = 0; i < draw; ++i) {
        const std::size_t j = i + cat_rng.next_below(cat_ids.size() - i);
        std::swap(cat_ids[i], cat_ids[j]);
    }
    cat_ids.resize(draw);
    std::sort(cat_ids.begin(), cat_ids.end());
    const std::unordered_set<int> part_set(cat_ids.begin(), cat_ids.end());

    const std::string part_dir = normalize_abs((fs::path(opts.out_dir) / "images_part").string());
    fs::create_directories(part_dir);

    PoisonOutput part = process_images(
        d_test_benign, opts.threads, [&](const ImageRecord& rec, PerImageOutcome& slot) {
            slot.record = rec;
            std::vector<char> flagged(rec.objects.size(), 0);
            bool any = false;
            for (std::size_t i = 0; i < rec.objects.size(); ++i) {
                flagged[i] =
                    !rec.objects[i].difficult && part_set.count(rec.objects[i].category_id) != 0;
                any = any || flagged[i];
            }
            if (!any) return;

            Image pixels = load_pixels_checked(rec);
            DetRng rng(derive_seed(spec.master_seed, rec.image_id)); // unused for center mode
            const StampStats stats = stamp_triggers(pixels, rec, flagged, trig,
                                                    spec.trigger_alpha,
                                                    PlacementMode::bbox_center, rng);
            if (stats.cropped > 0)
                slot.warnings.push_back("image '" + rec.image_id + "': " +
                                        std::to_string(stats.cropped) +
                                        " trigger(s) cropped at the image border");

            const std::string path = (fs::path(part_dir) / pixel_file_name(rec.image_id)).string();
            write_png(path, pixels);
            slot.record.pixel_path = path;
        });

    AttackProvenance part_prov;
    part_prov.kind = ProvenanceKind::test_variant;
    part_prov.spec = spec;
    part_prov.master_seed = spec.master_seed;
    for (const auto& rec : d_test_benign.images) {
        const bool touched = std::any_of(rec.objects.begin(), rec.objects.end(),
                                         [&](const AnnotatedObject& o) {
                                             return !o.difficult &&
                                                    part_set.count(o.category_id) != 0;
                                         });
        if (touched) part_prov.selected_image_ids.push_back(rec.image_id);
    }
    std::vector<std::string> part_names;
    for (const int id : cat_ids) part_names.push_back(d_test_benign.categories.name_of(id));
    part_prov.part_attack_categories = std::move(part_names);

    variants.part_backdoored_benign = std::move(part.dataset);
    variants.part_backdoored_benign.provenance = std::move(part_prov);
    for (auto& w : part.warnings) variants.warnings.push_back(std::move(w));

    return variants;
}

} // namespace badbox
