#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "core/corpus.hpp"

namespace badbox {

std::vector<Prediction> read_predictions_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open predictions file '" + path + "'");
    std::vector<Prediction> preds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::parse, "'" + path + "' line " + std::to_string(line_no) +
                                       ": malformed JSON: " + e.what());
        }
        Prediction p;
        try {
            p.image_id = j.at("image_id").get<std::string>();
            p.cx = j.at("cx").get<double>();
            p.cy = j.at("cy").get<double>();
            p.w = j.at("w").get<double>();
            p.h = j.at("h").get<double>();
            p.category_id = j.at("category").get<int>();
            p.score = j.at("score").get<double>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::parse, "'" + path + "' line " + std::to_string(line_no) +
                                       ": missing or mistyped field: " + e.what());
        }
        if (!(p.w > 0.0 && p.h > 0.0))
            fail(ErrorCode::invalid_argument,
                 "'" + path + "' line " + std::to_string(line_no) + ": non-positive box size");
        if (p.score < 0.0 || p.score > 1.0)
            fail(ErrorCode::invalid_argument,
                 "'" + path + "' line " + std::to_string(line_no) + ": score outside [0, 1]");
        preds.push_back(std::move(p));
    }
    return preds;
}

void write_predictions_jsonl(const std::vector<Prediction>& preds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
    for (const auto& p : preds) {
        ojson j;
        j["image_id"] = p.image_id;
        j["cx"] = p.cx;
        j["cy"] = p.cy;
        j["w"] = p.w;
        j["h"] = p.h;
        j["category"] = p.category_id;
        j["score"] = p.score;
        out << j.dump() << '\n';
    }
    if (!out) fail(ErrorCode::io, "write failed for '" + path + "'");
}

double iou(const Box& a, const Box& b) {
    const double ax0 = a.cx - a.w / 2.0, ax1 = a.cx + a.w / 2.0;
    const double ay0 = a.cy - a.h / 2.0, ay1 = a.cy + a.h / 2.0;
    const double bx0 = b.cx - b.w / 2.0, bx1 = b.cx + b.w / 2.0;
    const double by0 = b.cy - b.h / 2.0, by1 = b.cy + b.h / 2.0;

    const double ix = std::min(ax1, bx1) - std::max(ax0, bx0);
    const double iy = std::min(ay1, by1) - std::max(ay0, by0);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return inter / uni;
}

namespace {

// Score-descending processing order, ties broken by input position.
std::vector<std::size_t> score_order(const std::vector<Prediction>& preds) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
    return order;
}

} // namespace

MatchResult match_predictions(const std::vector<Prediction>& preds,
                              const std::vector<AnnotatedObject>& gts, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        fail(ErrorCode::invalid_argument, "iou_threshold must be in (0, 1]");

    MatchResult result;
    result.entries.assign(preds.size(), {});
    std::vector<char> taken(gts.size(), 0);

    for (const std::size_t pi : score_order(preds)) {
        double best_iou = 0.0;
        int best_gt = -1;
        double best_difficult_iou = 0.0;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            const double v = iou(box_of(preds[pi]), box_of(gts[gi]));
            if (gts[gi].difficult) {
                best_difficult_iou = std::max(best_difficult_iou, v);
                continue;
            }
            if (taken[gi]) continue;
            if (v > best_iou) { // strict: ties keep the lower index
                best_iou = v;
                best_gt = static_cast<int>(gi);
            }
        }
        if (best_gt >= 0 && best_iou >= iou_threshold) {
            result.entries[pi] = {PredOutcome::true_positive, best_gt};
            taken[best_gt] = 1;
            ++result.matched_gt;
        } else if (best_difficult_iou >= iou_threshold) {
            result.entries[pi] = {PredOutcome::ignored, -1};
        } else {
            result.entries[pi] = {PredOutcome::false_positive, -1};
        }
    }
    return result;
}

namespace {

struct SweepPoint {
    double recall;
    double precision;
};

double integrate_ap(const std::vector<SweepPoint>& points, Interpolation interp) {
    if (points.empty()) return 0.0;
    if (interp == Interpolation::all_point) {
        // Right-max precision envelope integrated over recall increments.
        double ap = 0.0;
        double env = 0.0;
        for (std::size_t i = points.size(); i-- > 0;) {
            env = std::max(env, points[i].precision);
            const double prev_recall = (i == 0) ? 0.0 : points[i - 1].recall;
            ap += (points[i].recall - prev_recall) * env;
        }
        return ap;
    }
    // Eleven-point: mean of max precision at recall >= {0, 0.1, ..., 1.0}.
    double sum = 0.0;
    for (int step = 0; step <= 10; ++step) {
        const double r = step / 10.0;
        double best = 0.0;
        double env = 0.0;
        for (std::size_t i = points.size(); i-- > 0;) {
            env = std::max(env, points[i].precision);
            if (points[i].recall >= r) best = env;
        }
        sum += best;
    }
    return sum / 11.0;
}

// Global score sweep with per-image greedy matching; the shared engine for
// average_precision and evaluate_suite.
APResult sweep_class(const std::vector<Prediction>& preds, const Dataset& gt, int category_id,
                     double iou_threshold, Interpolation interp) {
    if (!gt.categories.has_id(category_id))
        fail(ErrorCode::not_found, "unknown category id " + std::to_string(category_id));
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        fail(ErrorCode::invalid_argument, "iou_threshold must be in (0, 1]");

    std::unordered_map<std::string, std::size_t> image_index;
    for (std::size_t i = 0; i < gt.images.size(); ++i)
        image_index.emplace(gt.images[i].image_id, i);

    // Per-image ground-truth slots for this category.
    struct GtSlots {
        std::vector<std::size_t> normal; // object indices, non-difficult
        std::vector<std::size_t> difficult;
        std::vector<char> taken;
    };
    std::vector<GtSlots> slots(gt.images.size());
    std::size_t npos = 0;
    for (std::size_t i = 0; i < gt.images.size(); ++i) {
        for (std::size_t j = 0; j < gt.images[i].objects.size(); ++j) {
            const auto& o = gt.images[i].objects[j];
            if (o.category_id != category_id) continue;
            if (o.difficult)
                slots[i].difficult.push_back(j);
            else
                slots[i].normal.push_back(j);
        }
        slots[i].taken.assign(slots[i].normal.size(), 0);
        npos += slots[i].normal.size();
    }

    std::vector<std::size_t> class_preds;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].category_id != category_id) continue;
        if (!image_index.count(preds[i].image_id))
            fail(ErrorCode::not_found,
                 "prediction references unknown image_id '" + preds[i].image_id + "'");
        class_preds.push_back(i);
    }
    std::stable_sort(class_preds.begin(), class_preds.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].score > preds[b].score;
    });

    APResult result;
    result.gt_count = npos;

    std::vector<SweepPoint> points;
    points.reserve(class_preds.size());
    std::size_t tp = 0, fp = 0;
    for (const std::size_t pi : class_preds) {
        const Prediction& p = preds[pi];
        GtSlots& s = slots[image_index.at(p.image_id)];
        const auto& objects = gt.images[image_index.at(p.image_id)].objects;

        double best_iou = 0.0;
        int best_pos = -1;
        for (std::size_t k = 0; k < s.normal.size(); ++k) {
            if (s.taken[k]) continue;
            const double v = iou(box_of(p), box_of(objects[s.normal[k]]));
            if (v > best_iou) {
                best_iou = v;
                best_pos = static_cast<int>(k);
            }
        }
        if (best_pos >= 0 && best_iou >= iou_threshold) {
            s.taken[best_pos] = 1;
            ++tp;
        } else {
            double best_difficult = 0.0;
            for (const std::size_t j : s.difficult)
                best_difficult = std::max(best_difficult, iou(box_of(p), box_of(objects[j])));
            if (best_difficult >= iou_threshold) continue; // ignored
            ++fp;
        }
        points.push_back({npos > 0 ? static_cast<double>(tp) / npos : 0.0,
                          static_cast<double>(tp) / (tp + fp)});
    }

    result.tp = tp;
    result.fp = fp;
    result.pred_count = tp + fp;
    if (npos == 0 && result.pred_count == 0) {
        result.vacuous = true;
        result.value = 0.0;
        return result;
    }
    if (npos == 0) {
        result.value = 0.0;
        return result;
    }
    result.value = integrate_ap(points, interp);
    return result;
}

} // namespace

APResult average_precision(const std::vector<Prediction>& preds, const Dataset& gt,
                           int category_id, double iou_threshold, Interpolation interp) {
    return sweep_class(preds, gt, category_id, iou_threshold, interp);
}

MeanApResult mean_ap(const std::vector<Prediction>& preds, const Dataset& gt,
                     double iou_threshold, Interpolation interp) {
    if (gt.categories.empty())
        fail(ErrorCode::invalid_argument, "dataset categories must be non-empty");

    MeanApResult result;
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& cat : gt.categories.entries()) {
        const APResult ap = sweep_class(preds, gt, cat.id, iou_threshold, interp);
        if (ap.gt_count == 0) {
            result.skipped_classes.push_back(cat.id);
            continue;
        }
        result.per_class[cat.id] = ap.value;
        result.tp_total += ap.tp;
        result.gt_total += ap.gt_count;
        sum += ap.value;
        ++counted;
    }
    result.value = counted > 0 ? sum / counted : 0.0;
    return result;
}

AsrResult asr(const std::vector<Prediction>& preds_on_backdoored, const Dataset& benign_test,
              const AttackSpec& spec, double score_threshold, double iou_threshold) {
    if (!benign_test.categories.has_name(spec.attacked_class))
        fail(ErrorCode::not_found,
             "attacked class '" + spec.attacked_class + "' is not in the dataset");
    if (!benign_test.categories.has_name(spec.target_class))
        fail(ErrorCode::not_found, "target class '" + spec.target_class + "' is not in the dataset");
    const int attacked_id = benign_test.categories.id_of(spec.attacked_class);
    const int target_id = benign_test.categories.id_of(spec.target_class);

    std::unordered_map<std::string, std::size_t> image_index;
    for (std::size_t i = 0; i < benign_test.images.size(); ++i)
        image_index.emplace(benign_test.images[i].image_id, i);

    // Per-image target-class predictions above the score cut.
    std::vector<std::vector<std::size_t>> preds_by_image(benign_test.images.size());
    for (std::size_t i = 0; i < preds_on_backdoored.size(); ++i) {
        const Prediction& p = preds_on_backdoored[i];
        if (p.category_id != target_id || !(p.score > score_threshold)) continue;
        const auto it = image_index.find(p.image_id);
        if (it == image_index.end())
            fail(ErrorCode::not_found,
                 "prediction references unknown image_id '" + p.image_id + "'");
        preds_by_image[it->second].push_back(i);
    }

    AsrResult result;
    for (std::size_t img = 0; img < benign_test.images.size(); ++img) {
        const auto& objects = benign_test.images[img].objects;
        std::vector<std::size_t> gts;
        for (std::size_t j = 0; j < objects.size(); ++j)
            if (objects[j].category_id == attacked_id && !objects[j].difficult) gts.push_back(j);
        result.total += gts.size();
        if (gts.empty() || preds_by_image[img].empty()) continue;

        auto& order = preds_by_image[img];
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return preds_on_backdoored[a].score > preds_on_backdoored[b].score;
        });
        std::vector<char> taken(gts.size(), 0);
        for (const std::size_t pi : order) {
            double best_iou = 0.0;
            int best = -1;
            for (std::size_t k = 0; k < gts.size(); ++k) {
                if (taken[k]) continue;
                const double v = iou(box_of(preds_on_backdoored[pi]), box_of(objects[gts[k]]));
                if (v > best_iou) {
                    best_iou = v;
                    best = static_cast<int>(k);
                }
            }
            if (best >= 0 && best_iou > iou_threshold) {
                taken[best] = 1;
                ++result.hits;
            }
        }
    }

    if (result.total == 0) {
        result.vacuous = true;
        result.value = 0.0;
        return result;
    }
    result.value = static_cast<double>(result.hits) / result.total;
    return result;
}

EvalReport evaluate_suite(const std::map<std::string, std::vector<Prediction>>& pred_sets,
                          const TestVariants& variants, const AttackSpec& spec,
                          double iou_threshold, Interpolation interp) {
    for (const char* name : {kVariantBenign, kVariantBackdoored, kVariantBackdooredBenign,
                             kVariantPartBackdooredBenign})
        if (!pred_sets.count(name))
            fail(ErrorCode::invalid_argument,
                 std::string("missing prediction set for variant '") + name + "'");

    const auto& benign_preds = pred_sets.at(kVariantBenign);
    const auto& attack_preds = pred_sets.at(kVariantBackdoored);
    const auto& hybrid_preds = pred_sets.at(kVariantBackdooredBenign);
    const auto& part_preds = pred_sets.at(kVariantPartBackdooredBenign);

    if (!variants.benign.categories.has_name(spec.target_class))
        fail(ErrorCode::not_found, "target class '" + spec.target_class + "' is not in the dataset");
    const int target_id = variants.benign.categories.id_of(spec.target_class);

    EvalReport report;
    report.spec = spec;
    report.interpolation = interp;

    auto to_metric_ap = [](const APResult& r) {
        return MetricValue{r.value, r.tp, r.gt_count};
    };
    auto to_metric_map = [](const MeanApResult& r) {
        return MetricValue{r.value, r.tp_total, r.gt_total};
    };

    const MeanApResult m_benign = mean_ap(benign_preds, variants.benign, iou_threshold, interp);
    report.map_benign = to_metric_map(m_benign);
    for (const auto& [cat_id, value] : m_benign.per_class)
        report.per_class_ap[variants.benign.categories.name_of(cat_id)] = value;
    for (const int cat_id : m_benign.skipped_classes)
        report.vacuous_classes.push_back(variants.benign.categories.name_of(cat_id));
    if (!report.vacuous_classes.empty())
        report.warnings.push_back(std::to_string(report.vacuous_classes.size()) +
                                  " class(es) without ground truth excluded from mAP_benign");

    const APResult ap_benign =
        average_precision(benign_preds, variants.benign, target_id, iou_threshold, interp);
    report.ap_benign = to_metric_ap(ap_benign);
    if (ap_benign.vacuous)
        report.warnings.push_back("AP_benign is vacuous (no target-class ground truth, no predictions)");

    report.map_attack =
        to_metric_map(mean_ap(attack_preds, variants.backdoored, iou_threshold, interp));
    report.ap_attack = to_metric_ap(
        average_precision(attack_preds, variants.backdoored, target_id, iou_threshold, interp));

    report.map_attack_benign = to_metric_map(
        mean_ap(hybrid_preds, variants.backdoored_benign, iou_threshold, interp));
    report.ap_attack_benign = to_metric_ap(average_precision(
        hybrid_preds, variants.backdoored_benign, target_id, iou_threshold, interp));

    report.map_part_attack_benign = to_metric_map(
        mean_ap(part_preds, variants.part_backdoored_benign, iou_threshold, interp));

    const AsrResult asr_result = asr(attack_preds, variants.benign, spec, 0.5, 0.5);
    report.asr = MetricValue{asr_result.value, asr_result.hits, asr_result.total};
    if (asr_result.vacuous)
        report.warnings.push_back("ASR denominator is empty (no attacked-class ground truth)");

    return report;
}

namespace {

const char* interpolation_name(Interpolation interp) {
    return interp == Interpolation::all_point ? "all-point" : "11-point";
}

struct NamedMetric {
    const char* name;
    const MetricValue* value;
};

std::vector<NamedMetric> metric_rows(const EvalReport& r) {
    return {
        {"mAP_benign", &r.map_benign},
        {"AP_benign", &r.ap_benign},
        {"mAP_attack", &r.map_attack},
        {"AP_attack", &r.ap_attack},
        {"mAP_attack_benign", &r.map_attack_benign},
        {"AP_attack_benign", &r.ap_attack_benign},
        {"mAP_part_attack_benign", &r.map_part_attack_benign},
        {"ASR", &r.asr},
    };
}

} // namespace

ojson report_to_json(const EvalReport& report) {
    ojson j;
    j["schema_version"] = kReportSchemaVersion;
    j["interpolation"] = interpolation_name(report.interpolation);
    ojson metrics;
    for (const auto& [name, value] : metric_rows(report)) {
        ojson m;
        m["value"] = value->value;
        m["matched"] = value->matched;
        m["total"] = value->total;
        metrics[name] = std::move(m);
    }
    j["metrics"] = std::move(metrics);
    ojson per_class;
    for (const auto& [name, value] : report.per_class_ap) per_class[name] = value;
    j["per_class_ap"] = std::move(per_class);
    j["vacuous_classes"] = report.vacuous_classes;
    j["spec"] = attack_spec_to_json(report.spec);
    j["warnings"] = report.warnings;
    return j;
}

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "metric,value,matched,total\n";
    out.precision(17);
    for (const auto& [name, value] : metric_rows(report))
        out << name << ',' << value->value << ',' << value->matched << ',' << value->total << '\n';
    for (const auto& [name, value] : report.per_class_ap)
        out << "AP_class." << name << ',' << value << ",,\n";
    return out.str();
}

void write_report(const EvalReport& report, const std::string& json_path,
                  const std::string& csv_path) {
    write_json_file(json_path, report_to_json(report));
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) fail(ErrorCode::io, "cannot open '" + csv_path + "' for writing");
    csv << report_to_csv(report);
    if (!csv) fail(ErrorCode::io, "write failed for '" + csv_path + "'");
}

} // namespace badbox
