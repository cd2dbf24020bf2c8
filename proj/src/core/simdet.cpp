#include "core/simdet.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "core/rng.hpp"

namespace badbox {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

int poisson_draw(DetRng& rng, double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.next_real();
    } while (p > limit);
    return k - 1;
}

} // namespace

void validate_profile(const SimProfile& p) {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(p.detection_rate) || !in01(p.backdoor_fidelity) || !in01(p.degradation))
        fail(ErrorCode::invalid_argument, "profile probabilities must be in [0, 1]");
    if (p.false_positive_rate < 0.0)
        fail(ErrorCode::invalid_argument, "false_positive_rate must be >= 0");
    if (p.loc_jitter_sigma < 0.0)
        fail(ErrorCode::invalid_argument, "loc_jitter_sigma must be >= 0");
    if (!in01(p.tp_score_center) || !in01(p.fp_score_center) || p.tp_score_spread < 0.0 ||
        p.fp_score_spread < 0.0)
        fail(ErrorCode::invalid_argument, "score law parameters out of range");
}

std::vector<Prediction> simulate(const Dataset& variant, const Dataset& benign_twin,
                                 const SimProfile& profile, std::uint64_t seed) {
    validate_profile(profile);
    if (variant.images.size() != benign_twin.images.size())
        fail(ErrorCode::invalid_argument, "variant and benign twin have different image counts");
    for (std::size_t i = 0; i < variant.images.size(); ++i) {
        if (variant.images[i].image_id != benign_twin.images[i].image_id)
            fail(ErrorCode::invalid_argument,
                 "variant and benign twin disagree at position " + std::to_string(i) + " ('" +
                     variant.images[i].image_id + "' vs '" + benign_twin.images[i].image_id + "')");
        if (variant.images[i].objects.size() != benign_twin.images[i].objects.size())
            fail(ErrorCode::invalid_argument, "variant and benign twin disagree on object count in '" +
                                                  variant.images[i].image_id + "'");
    }

    // Trigger membership comes from provenance: the selected images, and
    // within them the boxes whose benign class is attacked (or any of the
    // drawn categories for the partial variant).
    int attacked_id = -1;
    int target_id = -1;
    std::unordered_set<std::string> selected;
    std::unordered_set<int> triggered_categories;
    if (variant.provenance) {
        const auto& prov = *variant.provenance;
        attacked_id = benign_twin.categories.id_of(prov.spec.attacked_class);
        target_id = benign_twin.categories.id_of(prov.spec.target_class);
        selected.insert(prov.selected_image_ids.begin(), prov.selected_image_ids.end());
        if (prov.part_attack_categories)
            for (const auto& name : *prov.part_attack_categories)
                triggered_categories.insert(benign_twin.categories.id_of(name));
        else
            triggered_categories.insert(attacked_id);
    }

    std::vector<Prediction> preds;
    for (std::size_t img = 0; img < variant.images.size(); ++img) {
        const ImageRecord& rec = variant.images[img];
        const ImageRecord& twin = benign_twin.images[img];
        const bool image_selected = selected.count(rec.image_id) != 0;
        DetRng rng(derive_seed(seed, rec.image_id));

        for (std::size_t j = 0; j < twin.objects.size(); ++j) {
            const AnnotatedObject& truth = twin.objects[j];
            // Fixed draw count per object keeps streams aligned across
            // profiles, which makes degraded runs nested subsets.
            const double u_detect = rng.next_real();
            const double u_flip = rng.next_real();
            const double u_score = rng.next_real();
            const auto [jx, jy] = rng.next_gaussian_pair();
            const auto [jw, jh] = rng.next_gaussian_pair();

            if (u_detect >= profile.detection_rate) continue;

            const bool triggered = image_selected && !truth.difficult &&
                                   triggered_categories.count(truth.category_id) != 0;
            const bool flips =
                triggered && truth.category_id == attacked_id && u_flip < profile.backdoor_fidelity;

            Prediction p;
            p.image_id = rec.image_id;
            p.category_id = flips ? target_id : truth.category_id;
            const double sigma = profile.loc_jitter_sigma;
            p.cx = truth.cx + sigma * jx;
            p.cy = truth.cy + sigma * jy;
            p.w = std::max(0.5, truth.w + 0.5 * sigma * jw);
            p.h = std::max(0.5, truth.h + 0.5 * sigma * jh);
            p.score = clamp01(profile.tp_score_center +
                              (2.0 * u_score - 1.0) * profile.tp_score_spread);
            preds.push_back(std::move(p));
        }

        const int spurious = poisson_draw(rng, profile.false_positive_rate);
        for (int k = 0; k < spurious; ++k) {
            Prediction p;
            p.image_id = rec.image_id;
            p.cx = rng.next_real() * rec.width;
            p.cy = rng.next_real() * rec.height;
            p.w = 2.0 + rng.next_real() * std::max(2.0, rec.width / 4.0);
            p.h = 2.0 + rng.next_real() * std::max(2.0, rec.height / 4.0);
            const std::size_t cat_pos = rng.next_below(benign_twin.categories.size());
            p.category_id = benign_twin.categories.entries()[cat_pos].id;
            p.score = clamp01(profile.fp_score_center +
                              (2.0 * rng.next_real() - 1.0) * profile.fp_score_spread);
            preds.push_back(std::move(p));
        }
    }
    return preds;
}

SimProfile degrade(const SimProfile& profile, double pruning_rate) {
    if (pruning_rate < 0.0 || pruning_rate > 1.0)
        fail(ErrorCode::invalid_argument, "pruning_rate must be in [0, 1]");
    SimProfile out = profile;
    out.detection_rate = profile.detection_rate * (1.0 - pruning_rate);
    out.backdoor_fidelity = profile.backdoor_fidelity * (1.0 - pruning_rate);
    if (pruning_rate > 0.0)
        out.degradation = 1.0 - (1.0 - profile.degradation) * (1.0 - pruning_rate);
    return out;
}

} // namespace badbox
