// badbox command-line tool: import -> make-trigger -> poison/shadow ->
// testsets -> simulate -> eval -> report, driven by a JSON config plus
// one-to-one flag overrides. Talks to the core library through the C API
// only. Data goes to stdout; diagnostics go to stderr as JSON lines.

#include <badbox/badbox.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kConfigSchemaVersion = 1;

// ---- logging ---------------------------------------------------------

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("BADBOX_LOG");
        if (!env) return 2;
        const std::string v(env);
        if (v == "quiet") return 0;
        if (v == "warn") return 1;
        if (v == "debug") return 3;
        return 2;
    }();
    return level;
}

void log_line(const char* level, int min_level, const std::string& message) {
    if (log_level() < min_level) return;
    ojson j;
    j["level"] = level;
    j["message"] = message;
    std::cerr << j.dump() << '\n';
}

void log_warn(const std::string& message) { log_line("warn", 1, message); }
void log_info(const std::string& message) { log_line("info", 2, message); }

void log_warnings_doc(char* warnings_json) {
    if (!warnings_json) return;
    try {
        const ojson arr = ojson::parse(warnings_json);
        for (const auto& w : arr) log_warn(w.get<std::string>());
    } catch (...) {
    }
    bb_string_free(warnings_json);
}

// ---- failure transport ------------------------------------------------

struct CliFailure {
    ojson doc;
};

[[noreturn]] void fail_doc(ojson error_body) {
    ojson doc;
    doc["error"] = std::move(error_body);
    throw CliFailure{std::move(doc)};
}

[[noreturn]] void fail_violations(std::vector<std::string> violations) {
    ojson body;
    body["kind"] = "invalid-config";
    body["violations"] = std::move(violations);
    fail_doc(std::move(body));
}

std::vector<std::string> g_completed_stages;

void stage_done(const std::string& name) {
    g_completed_stages.push_back(name);
    log_info("stage complete: " + name);
}

void check(bb_status status, const std::string& stage) {
    if (status == BB_OK) return;
    ojson body;
    body["kind"] = "operation-failed";
    body["stage"] = stage;
    body["status"] = static_cast<int>(status);
    body["message"] = bb_last_error();
    body["completed_stages"] = g_completed_stages;
    fail_doc(std::move(body));
}

// ---- handle RAII ------------------------------------------------------

struct DatasetDeleter {
    void operator()(bb_dataset* p) const { bb_dataset_free(p); }
};
struct TriggerDeleter {
    void operator()(bb_trigger* p) const { bb_trigger_free(p); }
};
struct PlanDeleter {
    void operator()(bb_plan* p) const { bb_plan_free(p); }
};
struct PredictionsDeleter {
    void operator()(bb_predictions* p) const { bb_predictions_free(p); }
};
struct ReportDeleter {
    void operator()(bb_report* p) const { bb_report_free(p); }
};

using DatasetH = std::unique_ptr<bb_dataset, DatasetDeleter>;
using TriggerH = std::unique_ptr<bb_trigger, TriggerDeleter>;
using PlanH = std::unique_ptr<bb_plan, PlanDeleter>;
using PredictionsH = std::unique_ptr<bb_predictions, PredictionsDeleter>;
using ReportH = std::unique_ptr<bb_report, ReportDeleter>;

DatasetH load_manifest_checked(const std::string& path, const std::string& stage) {
    bb_dataset* ds = nullptr;
    check(bb_dataset_load_manifest(path.c_str(), &ds), stage);
    return DatasetH(ds);
}

// ---- configuration ----------------------------------------------------

struct DatasetCfg {
    std::string format; // voc | coco
    std::string annotations;
    std::string images;
    std::string split;
    std::string classes; // optional vocabulary file
};

struct AttackCfg {
    std::string attacked_class;
    std::string target_class;
    double poison_rate = 0.005;
    double trigger_alpha = 1.0;
    std::string placement_mode = "bbox-center";
};

struct TriggerCfg {
    std::optional<int> htba_index;
    int width = 29;
    int height = 29;
    std::optional<std::string> file;
    double file_alpha = 1.0;
};

struct ProfileCfg {
    bb_sim_profile p{};
    double pruning_rate = 0.0;
    ProfileCfg() { bb_sim_profile_defaults(&p); }
};

struct InputsCfg {
    std::string manifest;
    std::string variant_manifest;
    std::string benign_manifest;
    std::string backdoored_manifest;
    std::string hybrid_manifest;
    std::string partial_manifest;
    std::string preds_benign;
    std::string preds_backdoored;
    std::string preds_hybrid;
    std::string preds_partial;
};

struct RunConfig {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    DatasetCfg dataset;
    AttackCfg attack;
    TriggerCfg trigger;
    ProfileCfg profile;
    InputsCfg inputs;
    bool eleven_point = false;
};

template <typename T>
void take(const ojson& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_violations({"config file '" + path + "' cannot be opened"});
    ojson j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail_violations({"config file '" + path + "' is not valid JSON: " + std::string(e.what())});
    }

    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kConfigSchemaVersion)
        fail_violations({"unsupported config schema_version (expected " +
                         std::to_string(kConfigSchemaVersion) + ")"});

    RunConfig cfg;
    try {
        take(j, "seed", cfg.seed);
        take(j, "threads", cfg.threads);
        if (j.contains("dataset")) {
            const auto& d = j.at("dataset");
            take(d, "format", cfg.dataset.format);
            take(d, "annotations", cfg.dataset.annotations);
            take(d, "images", cfg.dataset.images);
            take(d, "split", cfg.dataset.split);
            take(d, "classes", cfg.dataset.classes);
        }
        if (j.contains("attack")) {
            const auto& a = j.at("attack");
            take(a, "attacked_class", cfg.attack.attacked_class);
            take(a, "target_class", cfg.attack.target_class);
            take(a, "poison_rate", cfg.attack.poison_rate);
            take(a, "trigger_alpha", cfg.attack.trigger_alpha);
            take(a, "placement_mode", cfg.attack.placement_mode);
        }
        if (j.contains("trigger")) {
            const auto& t = j.at("trigger");
            if (t.contains("htba_index") && !t.at("htba_index").is_null())
                cfg.trigger.htba_index = t.at("htba_index").get<int>();
            take(t, "width", cfg.trigger.width);
            take(t, "height", cfg.trigger.height);
            if (t.contains("file") && !t.at("file").is_null())
                cfg.trigger.file = t.at("file").get<std::string>();
            take(t, "file_alpha", cfg.trigger.file_alpha);
        }
        if (j.contains("sim_profile")) {
            const auto& s = j.at("sim_profile");
            take(s, "detection_rate", cfg.profile.p.detection_rate);
            take(s, "backdoor_fidelity", cfg.profile.p.backdoor_fidelity);
            take(s, "false_positive_rate", cfg.profile.p.false_positive_rate);
            take(s, "loc_jitter_sigma", cfg.profile.p.loc_jitter_sigma);
            take(s, "tp_score_center", cfg.profile.p.tp_score_center);
            take(s, "tp_score_spread", cfg.profile.p.tp_score_spread);
            take(s, "fp_score_center", cfg.profile.p.fp_score_center);
            take(s, "fp_score_spread", cfg.profile.p.fp_score_spread);
            take(s, "pruning_rate", cfg.profile.pruning_rate);
        }
        if (j.contains("inputs")) {
            const auto& i = j.at("inputs");
            take(i, "manifest", cfg.inputs.manifest);
            take(i, "variant_manifest", cfg.inputs.variant_manifest);
            take(i, "benign_manifest", cfg.inputs.benign_manifest);
            take(i, "backdoored_manifest", cfg.inputs.backdoored_manifest);
            take(i, "hybrid_manifest", cfg.inputs.hybrid_manifest);
            take(i, "partial_manifest", cfg.inputs.partial_manifest);
            take(i, "preds_benign", cfg.inputs.preds_benign);
            take(i, "preds_backdoored", cfg.inputs.preds_backdoored);
            take(i, "preds_hybrid", cfg.inputs.preds_hybrid);
            take(i, "preds_partial", cfg.inputs.preds_partial);
        }
        if (j.contains("eval")) take(j.at("eval"), "eleven_point", cfg.eleven_point);
    } catch (const nlohmann::json::exception& e) {
        fail_violations({"config file '" + path + "': mistyped field: " + std::string(e.what())});
    }
    return cfg;
}

// Canonical resolved-config document. The output directory is deliberately
// not recorded: the file describes the artifact, not where it sits.
ojson resolved_config(const std::string& subcommand, const RunConfig& cfg,
                      const std::vector<std::string>& sections) {
    ojson j;
    j["schema_version"] = kConfigSchemaVersion;
    j["subcommand"] = subcommand;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    auto wants = [&](const char* s) {
        return std::find(sections.begin(), sections.end(), s) != sections.end();
    };
    if (wants("dataset")) {
        ojson d;
        d["format"] = cfg.dataset.format;
        d["annotations"] = cfg.dataset.annotations;
        d["images"] = cfg.dataset.images;
        if (!cfg.dataset.split.empty()) d["split"] = cfg.dataset.split;
        if (!cfg.dataset.classes.empty()) d["classes"] = cfg.dataset.classes;
        j["dataset"] = std::move(d);
    }
    if (wants("attack")) {
        ojson a;
        a["attacked_class"] = cfg.attack.attacked_class;
        a["target_class"] = cfg.attack.target_class;
        a["poison_rate"] = cfg.attack.poison_rate;
        a["trigger_alpha"] = cfg.attack.trigger_alpha;
        a["placement_mode"] = cfg.attack.placement_mode;
        j["attack"] = std::move(a);
    }
    if (wants("trigger")) {
        ojson t;
        if (cfg.trigger.htba_index) t["htba_index"] = *cfg.trigger.htba_index;
        if (cfg.trigger.file) {
            t["file"] = *cfg.trigger.file;
            t["file_alpha"] = cfg.trigger.file_alpha;
        }
        t["width"] = cfg.trigger.width;
        t["height"] = cfg.trigger.height;
        j["trigger"] = std::move(t);
    }
    if (wants("sim_profile")) {
        ojson s;
        s["detection_rate"] = cfg.profile.p.detection_rate;
        s["backdoor_fidelity"] = cfg.profile.p.backdoor_fidelity;
        s["false_positive_rate"] = cfg.profile.p.false_positive_rate;
        s["loc_jitter_sigma"] = cfg.profile.p.loc_jitter_sigma;
        s["tp_score_center"] = cfg.profile.p.tp_score_center;
        s["tp_score_spread"] = cfg.profile.p.tp_score_spread;
        s["fp_score_center"] = cfg.profile.p.fp_score_center;
        s["fp_score_spread"] = cfg.profile.p.fp_score_spread;
        s["pruning_rate"] = cfg.profile.pruning_rate;
        j["sim_profile"] = std::move(s);
    }
    if (wants("inputs")) {
        ojson i;
        auto put = [&](const char* key, const std::string& value) {
            if (!value.empty()) i[key] = value;
        };
        put("manifest", cfg.inputs.manifest);
        put("variant_manifest", cfg.inputs.variant_manifest);
        put("benign_manifest", cfg.inputs.benign_manifest);
        put("backdoored_manifest", cfg.inputs.backdoored_manifest);
        put("hybrid_manifest", cfg.inputs.hybrid_manifest);
        put("partial_manifest", cfg.inputs.partial_manifest);
        put("preds_benign", cfg.inputs.preds_benign);
        put("preds_backdoored", cfg.inputs.preds_backdoored);
        put("preds_hybrid", cfg.inputs.preds_hybrid);
        put("preds_partial", cfg.inputs.preds_partial);
        j["inputs"] = std::move(i);
    }
    if (wants("eval")) j["eval"] = ojson{{"eleven_point", cfg.eleven_point}};
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_doc(ojson{{"kind", "io"}, {"message", "cannot write '" + path + "'"}});
    out << content;
}

std::string prepare_out_dir(const std::string& out_dir, const ojson& config) {
    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "config.json").string(), config.dump(2) + "\n");
    return fs::absolute(out_dir).lexically_normal().string();
}

void require_exists(std::vector<std::string>& violations, const std::string& path,
                    const std::string& what) {
    if (path.empty())
        violations.push_back(what + " is required");
    else if (!fs::exists(path))
        violations.push_back(what + " '" + path + "' does not exist");
}

// Exactly one trigger source, and spec dimensions consistent with it.
TriggerH resolve_trigger(RunConfig& cfg, std::vector<std::string>& violations) {
    const bool has_index = cfg.trigger.htba_index.has_value();
    const bool has_file = cfg.trigger.file.has_value();
    if (has_index == has_file) {
        violations.push_back("exactly one trigger source required: trigger.htba_index or trigger.file");
        return nullptr;
    }
    if (!violations.empty()) return nullptr;

    bb_trigger* trig = nullptr;
    if (has_index) {
        check(bb_trigger_generate(*cfg.trigger.htba_index, cfg.trigger.width, cfg.trigger.height,
                                  &trig),
              "make-trigger");
    } else {
        check(bb_trigger_load(cfg.trigger.file->c_str(), cfg.trigger.file_alpha, &trig),
              "load-trigger");
        cfg.trigger.width = bb_trigger_width(trig);
        cfg.trigger.height = bb_trigger_height(trig);
    }
    return TriggerH(trig);
}

bb_attack_spec make_spec(const RunConfig& cfg, std::vector<std::string>& violations) {
    bb_attack_spec spec{};
    if (cfg.attack.attacked_class.empty()) violations.push_back("attack.attacked_class is required");
    if (cfg.attack.target_class.empty()) violations.push_back("attack.target_class is required");
    if (cfg.attack.poison_rate < 0.0 || cfg.attack.poison_rate > 1.0)
        violations.push_back("attack.poison_rate must be in [0, 1]");
    if (cfg.attack.trigger_alpha < 0.0 || cfg.attack.trigger_alpha > 1.0)
        violations.push_back("attack.trigger_alpha must be in [0, 1]");
    if (cfg.attack.placement_mode != "bbox-center" && cfg.attack.placement_mode != "random")
        violations.push_back("attack.placement_mode must be 'bbox-center' or 'random'");
    spec.attacked_class = cfg.attack.attacked_class.c_str();
    spec.target_class = cfg.attack.target_class.c_str();
    spec.poison_rate = cfg.attack.poison_rate;
    spec.trigger_width = cfg.trigger.width;
    spec.trigger_height = cfg.trigger.height;
    spec.trigger_alpha = cfg.attack.trigger_alpha;
    spec.placement_random = cfg.attack.placement_mode == "random" ? 1 : 0;
    spec.master_seed = cfg.seed;
    return spec;
}

void emit_result(const ojson& result) { std::cout << result.dump(2) << '\n'; }

// ---- subcommands ------------------------------------------------------

void cmd_import(RunConfig cfg, const std::string& out_dir) {
    std::vector<std::string> violations;
    if (cfg.dataset.format != "voc" && cfg.dataset.format != "coco")
        violations.push_back("dataset.format must be 'voc' or 'coco'");
    require_exists(violations, cfg.dataset.annotations, "dataset.annotations");
    require_exists(violations, cfg.dataset.images, "dataset.images");
    if (cfg.dataset.format == "voc") require_exists(violations, cfg.dataset.split, "dataset.split");
    if (!cfg.dataset.classes.empty())
        require_exists(violations, cfg.dataset.classes, "dataset.classes");
    if (!violations.empty()) fail_violations(std::move(violations));

    const std::string abs_out = prepare_out_dir(out_dir, resolved_config("import", cfg, {"dataset"}));

    bb_dataset* ds = nullptr;
    char* report = nullptr;
    if (cfg.dataset.format == "voc") {
        check(bb_dataset_import_voc(cfg.dataset.annotations.c_str(), cfg.dataset.images.c_str(),
                                    cfg.dataset.split.c_str(),
                                    cfg.dataset.classes.empty() ? nullptr
                                                                : cfg.dataset.classes.c_str(),
                                    &ds, &report),
              "import-voc");
    } else {
        check(bb_dataset_import_coco(cfg.dataset.annotations.c_str(), cfg.dataset.images.c_str(),
                                     &ds, &report),
              "import-coco");
    }
    DatasetH dataset(ds);
    stage_done("import");

    ojson report_doc;
    if (report) {
        report_doc = ojson::parse(report);
        bb_string_free(report);
        for (const auto& r : report_doc.at("rejected"))
            log_warn("rejected annotation " + r.at("annotation_id").get<std::string>() + ": " +
                     r.at("reason").get<std::string>());
    }
    const std::string manifest_path = (fs::path(abs_out) / "manifest.json").string();
    check(bb_dataset_export_manifest(dataset.get(), manifest_path.c_str()), "export-manifest");
    write_text_file((fs::path(abs_out) / "import_report.json").string(),
                    report_doc.dump(2) + "\n");
    stage_done("export-manifest");

    ojson result;
    result["manifest"] = manifest_path;
    result["images"] = bb_dataset_image_count(dataset.get());
    result["objects"] = bb_dataset_object_count(dataset.get());
    result["categories"] = bb_dataset_category_count(dataset.get());
    result["rejected"] = report_doc.is_null() ? 0 : report_doc.at("rejected").size();
    emit_result(result);
}

void cmd_make_trigger(RunConfig cfg, const std::string& out_dir) {
    std::vector<std::string> violations;
    TriggerH trig = resolve_trigger(cfg, violations);
    if (!violations.empty()) fail_violations(std::move(violations));

    const std::string abs_out =
        prepare_out_dir(out_dir, resolved_config("make-trigger", cfg, {"trigger"}));
    const std::string trig_path = (fs::path(abs_out) / "trigger.png").string();
    check(bb_trigger_save(trig.get(), trig_path.c_str()), "save-trigger");
    stage_done("make-trigger");

    ojson result;
    result["trigger"] = trig_path;
    result["width"] = bb_trigger_width(trig.get());
    result["height"] = bb_trigger_height(trig.get());
    emit_result(result);
}

void cmd_poison(RunConfig cfg, const std::string& out_dir, bool shadow) {
    std::vector<std::string> violations;
    require_exists(violations, cfg.inputs.manifest, "inputs.manifest");
    TriggerH trig = resolve_trigger(cfg, violations);
    bb_attack_spec spec = make_spec(cfg, violations);
    if (!violations.empty()) fail_violations(std::move(violations));

    const char* name = shadow ? "shadow" : "poison";
    const std::string abs_out = prepare_out_dir(
        out_dir, resolved_config(name, cfg, {"attack", "trigger", "inputs"}));

    DatasetH input = load_manifest_checked(cfg.inputs.manifest, "load-manifest");
    stage_done("load-manifest");

    bb_dataset* poisoned = nullptr;
    char* warnings = nullptr;
    std::size_t selected = 0;
    if (shadow) {
        check(bb_poison_shadow(input.get(), &spec, trig.get(), abs_out.c_str(), &poisoned,
                               &warnings),
              "shadow");
    } else {
        bb_plan* plan_raw = nullptr;
        check(bb_plan_create(input.get(), &spec, &plan_raw), "plan");
        PlanH plan(plan_raw);
        selected = bb_plan_selected_count(plan.get());
        stage_done("plan");
        check(bb_poison_apply(input.get(), plan.get(), trig.get(), abs_out.c_str(), &poisoned,
                              &warnings),
              "apply");
    }
    DatasetH output(poisoned);
    log_warnings_doc(warnings);
    stage_done(name);

    const std::string manifest_path = (fs::path(abs_out) / "manifest.json").string();
    check(bb_dataset_export_manifest(output.get(), manifest_path.c_str()), "export-manifest");
    stage_done("export-manifest");

    ojson result;
    result["manifest"] = manifest_path;
    if (!shadow) result["selected_images"] = selected;
    result["images"] = bb_dataset_image_count(output.get());
    emit_result(result);
}

void cmd_testsets(RunConfig cfg, const std::string& out_dir) {
    std::vector<std::string> violations;
    require_exists(violations, cfg.inputs.manifest, "inputs.manifest");
    TriggerH trig = resolve_trigger(cfg, violations);
    bb_attack_spec spec = make_spec(cfg, violations);
    if (!violations.empty()) fail_violations(std::move(violations));

    const std::string abs_out = prepare_out_dir(
        out_dir, resolved_config("testsets", cfg, {"attack", "trigger", "inputs"}));

    DatasetH input = load_manifest_checked(cfg.inputs.manifest, "load-manifest");
    stage_done("load-manifest");

    bb_dataset *benign = nullptr, *backdoored = nullptr, *hybrid = nullptr, *partial = nullptr;
    char* warnings = nullptr;
    check(bb_build_test_variants(input.get(), &spec, trig.get(), abs_out.c_str(), &benign,
                                 &backdoored, &hybrid, &partial, &warnings),
          "build-variants");
    DatasetH h_benign(benign), h_backdoored(backdoored), h_hybrid(hybrid), h_partial(partial);
    log_warnings_doc(warnings);
    stage_done("build-variants");

    ojson result;
    const std::vector<std::pair<std::string, bb_dataset*>> outputs = {
        {"benign", benign},
        {"backdoored", backdoored},
        {"backdoored_benign", hybrid},
        {"part_backdoored_benign", partial},
    };
    for (const auto& [vname, ds] : outputs) {
        const std::string path = (fs::path(abs_out) / (vname + ".json")).string();
        check(bb_dataset_export_manifest(ds, path.c_str()), "export-" + vname);
        result[vname] = path;
    }
    stage_done("export-manifests");
    emit_result(result);
}

void cmd_simulate(RunConfig cfg, const std::string& out_dir) {
    std::vector<std::string> violations;
    require_exists(violations, cfg.inputs.variant_manifest, "inputs.variant_manifest");
    require_exists(violations, cfg.inputs.benign_manifest, "inputs.benign_manifest");
    if (cfg.profile.pruning_rate < 0.0 || cfg.profile.pruning_rate > 1.0)
        violations.push_back("sim_profile.pruning_rate must be in [0, 1]");
    if (!violations.empty()) fail_violations(std::move(violations));

    const std::string abs_out = prepare_out_dir(
        out_dir, resolved_config("simulate", cfg, {"sim_profile", "inputs"}));

    DatasetH variant = load_manifest_checked(cfg.inputs.variant_manifest, "load-variant");
    DatasetH benign = load_manifest_checked(cfg.inputs.benign_manifest, "load-benign");
    stage_done("load-manifests");

    bb_sim_profile profile = cfg.profile.p;
    if (cfg.profile.pruning_rate > 0.0)
        check(bb_sim_profile_degrade(&profile, cfg.profile.pruning_rate, &profile), "degrade");

    bb_predictions* preds = nullptr;
    check(bb_simulate(variant.get(), benign.get(), &profile, cfg.seed, &preds), "simulate");
    PredictionsH predictions(preds);
    stage_done("simulate");

    const std::string preds_path = (fs::path(abs_out) / "predictions.jsonl").string();
    check(bb_predictions_save(predictions.get(), preds_path.c_str()), "save-predictions");
    stage_done("save-predictions");

    ojson result;
    result["predictions"] = preds_path;
    result["count"] = bb_predictions_count(predictions.get());
    emit_result(result);
}

void cmd_eval(RunConfig cfg, const std::string& out_dir) {
    std::vector<std::string> violations;
    require_exists(violations, cfg.inputs.benign_manifest, "inputs.benign_manifest");
    require_exists(violations, cfg.inputs.backdoored_manifest, "inputs.backdoored_manifest");
    require_exists(violations, cfg.inputs.hybrid_manifest, "inputs.hybrid_manifest");
    require_exists(violations, cfg.inputs.partial_manifest, "inputs.partial_manifest");
    require_exists(violations, cfg.inputs.preds_benign, "inputs.preds_benign");
    require_exists(violations, cfg.inputs.preds_backdoored, "inputs.preds_backdoored");
    require_exists(violations, cfg.inputs.preds_hybrid, "inputs.preds_hybrid");
    require_exists(violations, cfg.inputs.preds_partial, "inputs.preds_partial");
    bb_attack_spec spec = make_spec(cfg, violations);
    if (!violations.empty()) fail_violations(std::move(violations));

    const std::string abs_out = prepare_out_dir(
        out_dir, resolved_config("eval", cfg, {"attack", "trigger", "inputs", "eval"}));

    DatasetH benign = load_manifest_checked(cfg.inputs.benign_manifest, "load-benign");
    DatasetH backdoored = load_manifest_checked(cfg.inputs.backdoored_manifest, "load-backdoored");
    DatasetH hybrid = load_manifest_checked(cfg.inputs.hybrid_manifest, "load-hybrid");
    DatasetH partial = load_manifest_checked(cfg.inputs.partial_manifest, "load-partial");
    stage_done("load-manifests");

    auto load_preds = [](const std::string& path, const std::string& stage) {
        bb_predictions* p = nullptr;
        check(bb_predictions_load(path.c_str(), &p), stage);
        return PredictionsH(p);
    };
    PredictionsH p_benign = load_preds(cfg.inputs.preds_benign, "load-preds-benign");
    PredictionsH p_backdoored = load_preds(cfg.inputs.preds_backdoored, "load-preds-backdoored");
    PredictionsH p_hybrid = load_preds(cfg.inputs.preds_hybrid, "load-preds-hybrid");
    PredictionsH p_partial = load_preds(cfg.inputs.preds_partial, "load-preds-partial");
    stage_done("load-predictions");

    bb_report* report = nullptr;
    check(bb_evaluate_suite(benign.get(), backdoored.get(), hybrid.get(), partial.get(),
                            p_benign.get(), p_backdoored.get(), p_hybrid.get(), p_partial.get(),
                            &spec, cfg.eleven_point ? 1 : 0, &report),
          "evaluate");
    ReportH rep(report);
    stage_done("evaluate");

    const std::string json_path = (fs::path(abs_out) / "report.json").string();
    const std::string csv_path = (fs::path(abs_out) / "report.csv").string();
    check(bb_report_write(rep.get(), json_path.c_str(), csv_path.c_str()), "write-report");
    stage_done("write-report");

    char* doc = nullptr;
    check(bb_report_to_json(rep.get(), &doc), "render-report");
    std::cout << doc << '\n';
    bb_string_free(doc);
}

// Merges eval reports into one long-format CSV: one row per (run, metric).
void cmd_report(const std::vector<std::string>& report_paths, const std::string& out_dir) {
    std::vector<std::string> violations;
    if (report_paths.empty()) violations.push_back("at least one report.json input is required");
    for (const auto& p : report_paths) require_exists(violations, p, "report input");
    if (!violations.empty()) fail_violations(std::move(violations));

    ojson cfg_doc;
    cfg_doc["schema_version"] = kConfigSchemaVersion;
    cfg_doc["subcommand"] = "report";
    cfg_doc["inputs"] = report_paths;
    const std::string abs_out = prepare_out_dir(out_dir, cfg_doc);

    std::string csv = "run,poison_rate,trigger_width,trigger_height,trigger_alpha,metric,value\n";
    for (const auto& path : report_paths) {
        std::ifstream in(path);
        ojson j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            fail_doc(ojson{{"kind", "parse"},
                           {"message", "report '" + path + "' is not valid JSON: " + e.what()}});
        }
        const std::string run = fs::path(path).parent_path().filename().string().empty()
                                    ? fs::path(path).stem().string()
                                    : fs::path(path).parent_path().filename().string();
        const auto& spec = j.at("spec");
        char prefix[512];
        std::snprintf(prefix, sizeof(prefix), "%s,%.17g,%d,%d,%.17g", run.c_str(),
                      spec.at("poison_rate").get<double>(), spec.at("trigger_width").get<int>(),
                      spec.at("trigger_height").get<int>(), spec.at("trigger_alpha").get<double>());
        for (const auto& [metric, body] : j.at("metrics").items()) {
            char line[640];
            std::snprintf(line, sizeof(line), "%s,%s,%.17g\n", prefix, metric.c_str(),
                          body.at("value").get<double>());
            csv += line;
        }
    }
    const std::string csv_path = (fs::path(abs_out) / "merged.csv").string();
    write_text_file(csv_path, csv);

    ojson result;
    result["csv"] = csv_path;
    result["runs"] = report_paths.size();
    emit_result(result);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"badbox: build trigger-poisoned detection datasets, simulate detectors, "
                 "and score attack metrics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_flag;
    std::optional<unsigned> threads_flag;

    // dataset flags
    std::optional<std::string> f_format, f_annotations, f_images, f_split, f_classes;
    // attack flags
    std::optional<std::string> f_attacked, f_target, f_placement;
    std::optional<double> f_rate, f_alpha;
    // trigger flags
    std::optional<int> f_htba, f_tw, f_th;
    std::optional<std::string> f_trigger_file;
    std::optional<double> f_trigger_file_alpha;
    // profile flags
    std::optional<double> f_det, f_fid, f_fp, f_jitter, f_prune;
    // input flags
    std::optional<std::string> f_manifest, f_variant, f_benign, f_backdoored, f_hybrid, f_partial;
    std::optional<std::string> f_pb, f_pbd, f_ph, f_pp;
    bool f_eleven = false;
    std::vector<std::string> report_inputs;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--out", out_dir, "output artifact directory")->required();
        cmd->add_option("--seed", seed_flag, "master seed (overrides config)");
        cmd->add_option("--threads", threads_flag, "worker threads (never changes output bytes)");
    };
    auto add_trigger_flags = [&](CLI::App* cmd) {
        cmd->add_option("--htba-index", f_htba, "generated trigger index");
        cmd->add_option("--trigger-width", f_tw, "trigger width in pixels");
        cmd->add_option("--trigger-height", f_th, "trigger height in pixels");
        cmd->add_option("--trigger-file", f_trigger_file, "trigger PNG file");
        cmd->add_option("--trigger-file-alpha", f_trigger_file_alpha,
                        "opacity for triggers without an alpha channel");
    };
    auto add_attack_flags = [&](CLI::App* cmd) {
        cmd->add_option("--attacked-class", f_attacked, "category that receives triggers");
        cmd->add_option("--target-class", f_target, "category the attack aims for");
        cmd->add_option("--poison-rate", f_rate, "fraction of attacked-class images to poison");
        cmd->add_option("--trigger-alpha", f_alpha, "blend transparency in [0,1]");
        cmd->add_option("--placement", f_placement, "bbox-center or random");
    };

    CLI::App* c_import = app.add_subcommand("import", "convert VOC or COCO annotations to a manifest");
    add_common(c_import);
    c_import->add_option("--format", f_format, "voc or coco");
    c_import->add_option("--annotations", f_annotations, "annotation directory (VOC) or JSON (COCO)");
    c_import->add_option("--images", f_images, "image directory");
    c_import->add_option("--split", f_split, "split list file (VOC)");
    c_import->add_option("--classes", f_classes, "category vocabulary file (VOC)");

    CLI::App* c_trigger = app.add_subcommand("make-trigger", "synthesize or repackage a trigger PNG");
    add_common(c_trigger);
    add_trigger_flags(c_trigger);

    CLI::App* c_poison = app.add_subcommand("poison", "poison a fraction of attacked-class images");
    add_common(c_poison);
    add_trigger_flags(c_poison);
    add_attack_flags(c_poison);
    c_poison->add_option("--manifest", f_manifest, "input dataset manifest");

    CLI::App* c_shadow = app.add_subcommand("shadow", "poison every attacked-class image");
    add_common(c_shadow);
    add_trigger_flags(c_shadow);
    add_attack_flags(c_shadow);
    c_shadow->add_option("--manifest", f_manifest, "input dataset manifest");

    CLI::App* c_testsets = app.add_subcommand("testsets", "build the four evaluation variants");
    add_common(c_testsets);
    add_trigger_flags(c_testsets);
    add_attack_flags(c_testsets);
    c_testsets->add_option("--manifest", f_manifest, "benign test manifest");

    CLI::App* c_sim = app.add_subcommand("simulate", "emit synthetic detector predictions");
    add_common(c_sim);
    c_sim->add_option("--variant-manifest", f_variant, "dataset the detector sees");
    c_sim->add_option("--benign-manifest", f_benign, "benign twin manifest");
    c_sim->add_option("--detection-rate", f_det, "per-object emission probability");
    c_sim->add_option("--backdoor-fidelity", f_fid, "flip probability for triggered boxes");
    c_sim->add_option("--fp-rate", f_fp, "expected spurious boxes per image");
    c_sim->add_option("--jitter-sigma", f_jitter, "box jitter in pixels");
    c_sim->add_option("--pruning-rate", f_prune, "degrade the profile before simulating");

    CLI::App* c_eval = app.add_subcommand("eval", "score predictions into the metric report");
    add_common(c_eval);
    add_trigger_flags(c_eval);
    add_attack_flags(c_eval);
    c_eval->add_option("--benign-manifest", f_benign, "benign variant manifest");
    c_eval->add_option("--backdoored-manifest", f_backdoored, "backdoored variant manifest");
    c_eval->add_option("--hybrid-manifest", f_hybrid, "backdoored+benign variant manifest");
    c_eval->add_option("--partial-manifest", f_partial, "part_backdoored+benign variant manifest");
    c_eval->add_option("--preds-benign", f_pb, "predictions on the benign variant");
    c_eval->add_option("--preds-backdoored", f_pbd, "predictions on the backdoored variant");
    c_eval->add_option("--preds-hybrid", f_ph, "predictions on the hybrid variant");
    c_eval->add_option("--preds-partial", f_pp, "predictions on the partial variant");
    c_eval->add_flag("--eleven-point", f_eleven, "use 11-point interpolation");

    CLI::App* c_report = app.add_subcommand("report", "merge eval reports into one CSV");
    add_common(c_report);
    c_report->add_option("reports", report_inputs, "report.json files to merge");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = parse_config_file(config_path);

        // flag overrides, one-to-one with config fields
        if (seed_flag) cfg.seed = *seed_flag;
        if (threads_flag) cfg.threads = *threads_flag;
        if (f_format) cfg.dataset.format = *f_format;
        if (f_annotations) cfg.dataset.annotations = *f_annotations;
        if (f_images) cfg.dataset.images = *f_images;
        if (f_split) cfg.dataset.split = *f_split;
        if (f_classes) cfg.dataset.classes = *f_classes;
        if (f_attacked) cfg.attack.attacked_class = *f_attacked;
        if (f_target) cfg.attack.target_class = *f_target;
        if (f_rate) cfg.attack.poison_rate = *f_rate;
        if (f_alpha) cfg.attack.trigger_alpha = *f_alpha;
        if (f_placement) cfg.attack.placement_mode = *f_placement;
        if (f_htba) cfg.trigger.htba_index = *f_htba;
        if (f_tw) cfg.trigger.width = *f_tw;
        if (f_th) cfg.trigger.height = *f_th;
        if (f_trigger_file) cfg.trigger.file = *f_trigger_file;
        if (f_trigger_file_alpha) cfg.trigger.file_alpha = *f_trigger_file_alpha;
        if (f_det) cfg.profile.p.detection_rate = *f_det;
        if (f_fid) cfg.profile.p.backdoor_fidelity = *f_fid;
        if (f_fp) cfg.profile.p.false_positive_rate = *f_fp;
        if (f_jitter) cfg.profile.p.loc_jitter_sigma = *f_jitter;
        if (f_prune) cfg.profile.pruning_rate = *f_prune;
        if (f_manifest) cfg.inputs.manifest = *f_manifest;
        if (f_variant) cfg.inputs.variant_manifest = *f_variant;
        if (f_benign) cfg.inputs.benign_manifest = *f_benign;
        if (f_backdoored) cfg.inputs.backdoored_manifest = *f_backdoored;
        if (f_hybrid) cfg.inputs.hybrid_manifest = *f_hybrid;
        if (f_partial) cfg.inputs.partial_manifest = *f_partial;
        if (f_pb) cfg.inputs.preds_benign = *f_pb;
        if (f_pbd) cfg.inputs.preds_backdoored = *f_pbd;
        if (f_ph) cfg.inputs.preds_hybrid = *f_ph;
        if (f_pp) cfg.inputs.preds_partial = *f_pp;
        if (f_eleven) cfg.eleven_point = true;

        bb_set_thread_count(cfg.threads);

        if (c_import->parsed()) cmd_import(std::move(cfg), out_dir);
        else if (c_trigger->parsed()) cmd_make_trigger(std::move(cfg), out_dir);
        else if (c_poison->parsed()) cmd_poison(std::move(cfg), out_dir, false);
        else if (c_shadow->parsed()) cmd_poison(std::move(cfg), out_dir, true);
        else if (c_testsets->parsed()) cmd_testsets(std::move(cfg), out_dir);
        else if (c_sim->parsed()) cmd_simulate(std::move(cfg), out_dir);
        else if (c_eval->parsed()) cmd_eval(std::move(cfg), out_dir);
        else if (c_report->parsed()) cmd_report(report_inputs, out_dir);
        return 0;
    } catch (const CliFailure& failure) {
        std::cerr << failure.doc.dump(2) << '\n';
        return 1;
    } catch (const std::exception& e) {
        ojson doc;
        doc["error"] = ojson{{"kind", "internal"}, {"message", e.what()}};
        std::cerr << doc.dump(2) << '\n';
        return 2;
    }
}
