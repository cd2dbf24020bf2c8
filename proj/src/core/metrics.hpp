#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/json_util.hpp"
#include "core/poison.hpp"
#include "core/types.hpp"

namespace badbox {

struct Prediction {
    std::string image_id;
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    int category_id = 0;
    double score = 0.0;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

// JSON Lines, one object per line:
//   {"image_id": ..., "cx": ..., "cy": ..., "w": ..., "h": ..., "category": ..., "score": ...}
std::vector<Prediction> read_predictions_jsonl(const std::string& path);
void write_predictions_jsonl(const std::vector<Prediction>& preds, const std::string& path);

struct Box {
    double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
};

inline Box box_of(const AnnotatedObject& o) { return {o.cx, o.cy, o.w, o.h}; }
inline Box box_of(const Prediction& p) { return {p.cx, p.cy, p.w, p.h}; }

// Intersection area over union area; 0 for disjoint boxes.
double iou(const Box& a, const Box& b);

enum class PredOutcome { true_positive, false_positive, ignored };

struct MatchEntry {
    PredOutcome outcome = PredOutcome::false_positive;
    int gt_index = -1; // into the ground-truth span, set for true positives
};

struct MatchResult {
    std::vector<MatchEntry> entries; // parallel to the prediction input order
    std::size_t matched_gt = 0;
};

// Greedy one-image, one-category matching. Predictions are processed in
// descending score (ties by input order); each takes the unmatched
// non-difficult ground truth of highest IoU >= threshold (ties by index).
// Predictions whose only qualifying overlap is a difficult ground truth are
// ignored: neither true nor false positives.
MatchResult match_predictions(const std::vector<Prediction>& preds,
                              const std::vector<AnnotatedObject>& gts, double iou_threshold);

enum class Interpolation { all_point, eleven_point };

struct APResult {
    double value = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t gt_count = 0;   // non-difficult ground truths of the class
    std::size_t pred_count = 0; // predictions of the class (ignored ones excluded)
    bool vacuous = false;       // no ground truth and no predictions
};

APResult average_precision(const std::vector<Prediction>& preds, const Dataset& gt,
                           int category_id, double iou_threshold, Interpolation interp);

struct MeanApResult {
    double value = 0.0;
    std::map<int, double> per_class;  // classes with >= 1 non-difficult GT
    std::vector<int> skipped_classes; // no countable GT; excluded from the mean
    std::size_t tp_total = 0;
    std::size_t gt_total = 0;
};

MeanApResult mean_ap(const std::vector<Prediction>& preds, const Dataset& gt,
                     double iou_threshold, Interpolation interp);

struct AsrResult {
    double value = 0.0;
    std::size_t hits = 0;
    std::size_t total = 0; // benign non-difficult attacked-class boxes
    bool vacuous = false;  // empty denominator
};

// Fraction of benign attacked-class boxes hit by a target-class prediction
// with score strictly above score_threshold and IoU strictly above
// iou_threshold, matched one-to-one greedily by score.
AsrResult asr(const std::vector<Prediction>& preds_on_backdoored, const Dataset& benign_test,
              const AttackSpec& spec, double score_threshold = 0.5, double iou_threshold = 0.5);

struct MetricValue {
    double value = 0.0;
    std::size_t matched = 0;
    std::size_t total = 0;
};

struct EvalReport {
    MetricValue map_benign;
    MetricValue ap_benign;
    MetricValue map_attack;
    MetricValue ap_attack;
    MetricValue map_attack_benign;
    MetricValue ap_attack_benign;
    MetricValue map_part_attack_benign;
    MetricValue asr;
    std::map<std::string, double> per_class_ap; // per-class AP on the benign variant
    std::vector<std::string> vacuous_classes;   // excluded from mAP_benign
    AttackSpec spec;
    Interpolation interpolation = Interpolation::all_point;
    std::vector<std::string> warnings;
};

// Canonical prediction-set names for the four variants.
inline constexpr const char* kVariantBenign = "benign";
inline constexpr const char* kVariantBackdoored = "backdoored";
inline constexpr const char* kVariantBackdooredBenign = "backdoored_benign";
inline constexpr const char* kVariantPartBackdooredBenign = "part_backdoored_benign";

EvalReport evaluate_suite(const std::map<std::string, std::vector<Prediction>>& pred_sets,
                          const TestVariants& variants, const AttackSpec& spec,
                          double iou_threshold = 0.5,
                          Interpolation interp = Interpolation::all_point);

inline constexpr int kReportSchemaVersion = 1;
ojson report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);
void write_report(const EvalReport& report, const std::string& json_path,
                  const std::string& csv_path);

} // namespace badbox
