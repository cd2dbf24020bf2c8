#include "badbox/badbox.h"

#include <atomic>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "core/corpus.hpp"
#include "core/metrics.hpp"
#include "core/poison.hpp"
#include "core/simdet.hpp"
#include "core/trigger.hpp"

struct bb_dataset {
    badbox::Dataset value;
};
struct bb_trigger {
    badbox::TriggerPattern value;
};
struct bb_plan {
    badbox::PoisonPlan value;
};
struct bb_predictions {
    std::vector<badbox::Prediction> value;
};
struct bb_report {
    badbox::EvalReport value;
};

namespace {

thread_local std::string t_last_error;
std::atomic<unsigned> g_threads{1};

bb_status map_code(badbox::ErrorCode code) {
    switch (code) {
        case badbox::ErrorCode::io: return BB_ERR_IO;
        case badbox::ErrorCode::parse: return BB_ERR_PARSE;
        case badbox::ErrorCode::invalid_argument: return BB_ERR_INVALID;
        case badbox::ErrorCode::not_found: return BB_ERR_NOT_FOUND;
        case badbox::ErrorCode::schema: return BB_ERR_SCHEMA;
        case badbox::ErrorCode::conflict: return BB_ERR_CONFLICT;
    }
    return BB_ERR_INTERNAL;
}

template <typename Fn>
bb_status guarded(Fn&& fn) {
    try {
        fn();
        return BB_OK;
    } catch (const badbox::Error& e) {
        t_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return BB_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return BB_ERR_INTERNAL;
    }
}

bb_status null_arg(const char* what) {
    t_last_error = std::string(what) + " must not be null";
    return BB_ERR_NULL_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

badbox::AttackSpec to_spec(const bb_attack_spec& in) {
    badbox::AttackSpec spec;
    spec.attacked_class = in.attacked_class ? in.attacked_class : "";
    spec.target_class = in.target_class ? in.target_class : "";
    spec.poison_rate = in.poison_rate;
    spec.trigger_width = in.trigger_width;
    spec.trigger_height = in.trigger_height;
    spec.trigger_alpha = in.trigger_alpha;
    spec.placement_mode = in.placement_random ? badbox::PlacementMode::random_location
                                              : badbox::PlacementMode::bbox_center;
    spec.master_seed = in.master_seed;
    return spec;
}

badbox::SimProfile to_profile(const bb_sim_profile& in) {
    badbox::SimProfile p;
    p.detection_rate = in.detection_rate;
    p.backdoor_fidelity = in.backdoor_fidelity;
    p.false_positive_rate = in.false_positive_rate;
    p.loc_jitter_sigma = in.loc_jitter_sigma;
    p.tp_score_center = in.tp_score_center;
    p.tp_score_spread = in.tp_score_spread;
    p.fp_score_center = in.fp_score_center;
    p.fp_score_spread = in.fp_score_spread;
    p.degradation = in.degradation;
    return p;
}

std::string import_report_json(const badbox::ImportReport& report) {
    badbox::ojson j;
    badbox::ojson rejected = badbox::ojson::array();
    for (const auto& r : report.rejected)
        rejected.push_back({{"annotation_id", r.annotation_id}, {"reason", r.reason}});
    j["rejected"] = std::move(rejected);
    j["warnings"] = report.warnings;
    return j.dump();
}

std::string warnings_json(const std::vector<std::string>& warnings) {
    return badbox::ojson(warnings).dump();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) badbox::fail(badbox::ErrorCode::io, "cannot open class list '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const auto begin = line.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r\n");
        lines.push_back(line.substr(begin, end - begin + 1));
    }
    return lines;
}

} // namespace

extern "C" {

const char* bb_version(void) { return "0.1.0"; }

const char* bb_last_error(void) { return t_last_error.c_str(); }

void bb_string_free(char* s) { std::free(s); }

void bb_string_list_free(char** list, size_t count) {
    if (!list) return;
    for (size_t i = 0; i < count; ++i) std::free(list[i]);
    std::free(list);
}

void bb_set_thread_count(unsigned threads) { g_threads.store(threads == 0 ? 1 : threads); }

unsigned bb_thread_count(void) { return g_threads.load(); }

/* ---- datasets ------------------------------------------------------- */

bb_status bb_dataset_import_voc(const char* annotation_dir, const char* image_dir,
                                const char* split_list, const char* classes_file,
                                bb_dataset** out, char** report_json) {
    if (!annotation_dir || !image_dir || !split_list) return null_arg("path argument");
    if (!out) return null_arg("out");
    return guarded([&] {
        std::vector<std::string> classes;
        if (classes_file) classes = read_lines(classes_file);
        badbox::ImportResult result =
            badbox::import_voc(annotation_dir, image_dir, split_list, classes);
        if (report_json) *report_json = dup_string(import_report_json(result.report));
        *out = new bb_dataset{std::move(result.dataset)};
    });
}

bb_status bb_dataset_import_coco(const char* annotation_json, const char* image_dir,
                                 bb_dataset** out, char** report_json) {
    if (!annotation_json || !image_dir) return null_arg("path argument");
    if (!out) return null_arg("out");
    return guarded([&] {
        badbox::ImportResult result = badbox::import_coco(annotation_json, image_dir);
        if (report_json) *report_json = dup_string(import_report_json(result.report));
        *out = new bb_dataset{std::move(result.dataset)};
    });
}

bb_status bb_dataset_load_manifest(const char* path, bb_dataset** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new bb_dataset{badbox::load_manifest(path)}; });
}

bb_status bb_dataset_export_manifest(const bb_dataset* ds, const char* path) {
    if (!ds) return null_arg("ds");
    if (!path) return null_arg("path");
    return guarded([&] { badbox::export_manifest(ds->value, path); });
}

void bb_dataset_free(bb_dataset* ds) { delete ds; }

size_t bb_dataset_image_count(const bb_dataset* ds) { return ds ? ds->value.images.size() : 0; }

size_t bb_dataset_category_count(const bb_dataset* ds) {
    return ds ? ds->value.categories.size() : 0;
}

size_t bb_dataset_object_count(const bb_dataset* ds) {
    if (!ds) return 0;
    size_t n = 0;
    for (const auto& rec : ds->value.images) n += rec.objects.size();
    return n;
}

int bb_dataset_has_provenance(const bb_dataset* ds) {
    return ds && ds->value.provenance ? 1 : 0;
}

bb_status bb_dataset_images_with_class(const bb_dataset* ds, const char* category_name,
                                       char*** out_ids, size_t* out_count) {
    if (!ds) return null_arg("ds");
    if (!category_name) return null_arg("category_name");
    if (!out_ids || !out_count) return null_arg("out");
    return guarded([&] {
        const int id = ds->value.categories.id_of(category_name);
        const std::vector<std::string> ids = badbox::images_with_class(ds->value, id);
        char** list = static_cast<char**>(std::malloc(sizeof(char*) * (ids.empty() ? 1 : ids.size())));
        for (size_t i = 0; i < ids.size(); ++i) list[i] = dup_string(ids[i]);
        *out_ids = list;
        *out_count = ids.size();
    });
}

/* ---- triggers ------------------------------------------------------- */

bb_status bb_trigger_generate(int index, int width, int height, bb_trigger** out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = new bb_trigger{badbox::generate_htba(index, width, height)}; });
}

bb_status bb_trigger_load(const char* png_path, double uniform_alpha, bb_trigger** out) {
    if (!png_path) return null_arg("png_path");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new bb_trigger{badbox::load_trigger(png_path, uniform_alpha)}; });
}

bb_status bb_trigger_save(const bb_trigger* trig, const char* png_path) {
    if (!trig) return null_arg("trig");
    if (!png_path) return null_arg("png_path");
    return guarded([&] { badbox::save_trigger(trig->value, png_path); });
}

int bb_trigger_width(const bb_trigger* trig) { return trig ? trig->value.width : 0; }
int bb_trigger_height(const bb_trigger* trig) { return trig ? trig->value.height : 0; }

void bb_trigger_free(bb_trigger* trig) { delete trig; }

/* ---- poisoning ------------------------------------------------------ */

bb_status bb_plan_create(const bb_dataset* ds, const bb_attack_spec* spec, bb_plan** out) {
    if (!ds) return null_arg("ds");
    if (!spec) return null_arg("spec");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new bb_plan{badbox::plan_na(ds->value, to_spec(*spec))}; });
}

size_t bb_plan_selected_count(const bb_plan* plan) {
    return plan ? plan->value.selected_image_ids.size() : 0;
}

void bb_plan_free(bb_plan* plan) { delete plan; }

bb_status bb_poison_apply(const bb_dataset* ds, const bb_plan* plan, const bb_trigger* trig,
                          const char* out_dir, bb_dataset** out, char** warnings) {
    if (!ds || !plan || !trig) return null_arg("handle argument");
    if (!out_dir) return null_arg("out_dir");
    if (!out) return null_arg("out");
    return guarded([&] {
        badbox::ApplyOptions opts{out_dir, g_threads.load()};
        badbox::PoisonOutput result = badbox::apply_plan(ds->value, plan->value, trig->value, opts);
        if (warnings) *warnings = dup_string(warnings_json(result.warnings));
        *out = new bb_dataset{std::move(result.dataset)};
    });
}

bb_status bb_poison_shadow(const bb_dataset* ds, const bb_attack_spec* spec,
                           const bb_trigger* trig, const char* out_dir, bb_dataset** out,
                           char** warnings) {
    if (!ds || !spec || !trig) return null_arg("handle argument");
    if (!out_dir) return null_arg("out_dir");
    if (!out) return null_arg("out");
    return guarded([&] {
        badbox::ApplyOptions opts{out_dir, g_threads.load()};
        badbox::PoisonOutput result =
            badbox::build_shadow(ds->value, to_spec(*spec), trig->value, opts);
        if (warnings) *warnings = dup_string(warnings_json(result.warnings));
        *out = new bb_dataset{std::move(result.dataset)};
    });
}

bb_status bb_build_test_variants(const bb_dataset* ds, const bb_attack_spec* spec,
                                 const bb_trigger* trig, const char* out_dir,
                                 bb_dataset** out_benign, bb_dataset** out_backdoored,
                                 bb_dataset** out_backdoored_benign,
                                 bb_dataset** out_part_backdoored_benign, char** warnings) {
    if (!ds || !spec || !trig) return null_arg("handle argument");
    if (!out_dir) return null_arg("out_dir");
    if (!out_benign || !out_backdoored || !out_backdoored_benign || !out_part_backdoored_benign)
        return null_arg("out");
    return guarded([&] {
        badbox::ApplyOptions opts{out_dir, g_threads.load()};
        badbox::TestVariants v =
            badbox::build_test_variants(ds->value, to_spec(*spec), trig->value, opts);
        if (warnings) *warnings = dup_string(warnings_json(v.warnings));
        *out_benign = new bb_dataset{std::move(v.benign)};
        *out_backdoored = new bb_dataset{std::move(v.backdoored)};
        *out_backdoored_benign = new bb_dataset{std::move(v.backdoored_benign)};
        *out_part_backdoored_benign = new bb_dataset{std::move(v.part_backdoored_benign)};
    });
}

/* ---- simulated detector --------------------------------------------- */

void bb_sim_profile_defaults(bb_sim_profile* out) {
    if (!out) return;
    const badbox::SimProfile p;
    *out = {p.detection_rate, p.backdoor_fidelity, p.false_positive_rate, p.loc_jitter_sigma,
            p.tp_score_center, p.tp_score_spread, p.fp_score_center, p.fp_score_spread,
            p.degradation};
}

bb_status bb_sim_profile_degrade(const bb_sim_profile* profile, double pruning_rate,
                                 bb_sim_profile* out) {
    if (!profile || !out) return null_arg("profile");
    return guarded([&] {
        const badbox::SimProfile degraded = badbox::degrade(to_profile(*profile), pruning_rate);
        *out = *profile;
        out->detection_rate = degraded.detection_rate;
        out->backdoor_fidelity = degraded.backdoor_fidelity;
        out->degradation = degraded.degradation;
    });
}

bb_status bb_simulate(const bb_dataset* variant, const bb_dataset* benign_twin,
                      const bb_sim_profile* profile, uint64_t seed, bb_predictions** out) {
    if (!variant || !benign_twin || !profile) return null_arg("handle argument");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new bb_predictions{
            badbox::simulate(variant->value, benign_twin->value, to_profile(*profile), seed)};
    });
}

bb_status bb_predictions_load(const char* jsonl_path, bb_predictions** out) {
    if (!jsonl_path) return null_arg("jsonl_path");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new bb_predictions{badbox::read_predictions_jsonl(jsonl_path)}; });
}

bb_status bb_predictions_save(const bb_predictions* preds, const char* jsonl_path) {
    if (!preds) return null_arg("preds");
    if (!jsonl_path) return null_arg("jsonl_path");
    return guarded([&] { badbox::write_predictions_jsonl(preds->value, jsonl_path); });
}

size_t bb_predictions_count(const bb_predictions* preds) {
    return preds ? preds->value.size() : 0;
}

void bb_predictions_free(bb_predictions* preds) { delete preds; }

/* ---- evaluation ------------------------------------------------------ */

bb_status bb_evaluate_suite(const bb_dataset* benign, const bb_dataset* backdoored,
                            const bb_dataset* backdoored_benign,
                            const bb_dataset* part_backdoored_benign,
                            const bb_predictions* preds_benign,
                            const bb_predictions* preds_backdoored,
                            const bb_predictions* preds_backdoored_benign,
                            const bb_predictions* preds_part, const bb_attack_spec* spec,
                            int eleven_point, bb_report** out) {
    if (!benign || !backdoored || !backdoored_benign || !part_backdoored_benign)
        return null_arg("dataset argument");
    if (!preds_benign || !preds_backdoored || !preds_backdoored_benign || !preds_part)
        return null_arg("predictions argument");
    if (!spec) return null_arg("spec");
    if (!out) return null_arg("out");
    return guarded([&] {
        badbox::TestVariants variants;
        variants.benign = benign->value;
        variants.backdoored = backdoored->value;
        variants.backdoored_benign = backdoored_benign->value;
        variants.part_backdoored_benign = part_backdoored_benign->value;

        std::map<std::string, std::vector<badbox::Prediction>> pred_sets;
        pred_sets[badbox::kVariantBenign] = preds_benign->value;
        pred_sets[badbox::kVariantBackdoored] = preds_backdoored->value;
        pred_sets[badbox::kVariantBackdooredBenign] = preds_backdoored_benign->value;
        pred_sets[badbox::kVariantPartBackdooredBenign] = preds_part->value;

        const badbox::Interpolation interp = eleven_point ? badbox::Interpolation::eleven_point
                                                          : badbox::Interpolation::all_point;
        *out = new bb_report{
            badbox::evaluate_suite(pred_sets, variants, to_spec(*spec), 0.5, interp)};
    });
}

bb_status bb_report_metric(const bb_report* report, const char* name, double* out_value) {
    if (!report) return null_arg("report");
    if (!name || !out_value) return null_arg("name/out_value");
    const badbox::EvalReport& r = report->value;
    const std::string key(name);
    const badbox::MetricValue* v = nullptr;
    if (key == "mAP_benign") v = &r.map_benign;
    else if (key == "AP_benign") v = &r.ap_benign;
    else if (key == "mAP_attack") v = &r.map_attack;
    else if (key == "AP_attack") v = &r.ap_attack;
    else if (key == "mAP_attack_benign") v = &r.map_attack_benign;
    else if (key == "AP_attack_benign") v = &r.ap_attack_benign;
    else if (key == "mAP_part_attack_benign") v = &r.map_part_attack_benign;
    else if (key == "ASR") v = &r.asr;
    if (!v) {
        t_last_error = "unknown metric '" + key + "'";
        return BB_ERR_NOT_FOUND;
    }
    *out_value = v->value;
    return BB_OK;
}

bb_status bb_report_write(const bb_report* report, const char* json_path, const char* csv_path) {
    if (!report) return null_arg("report");
    if (!json_path || !csv_path) return null_arg("path");
    return guarded([&] { badbox::write_report(report->value, json_path, csv_path); });
}

bb_status bb_report_to_json(const bb_report* report, char** out_json) {
    if (!report) return null_arg("report");
    if (!out_json) return null_arg("out_json");
    return guarded([&] { *out_json = dup_string(badbox::report_to_json(report->value).dump(2)); });
}

void bb_report_free(bb_report* report) { delete report; }

} /* extern "C" */
