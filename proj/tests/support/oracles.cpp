#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

using namespace badbox;

namespace testsupport {

std::vector<double> oracle_bilinear_resize(const std::vector<std::uint8_t>& patch4x4, int out_w,
                                           int out_h) {
    const int src = 4;
    std::vector<double> out(static_cast<std::size_t>(out_w) * out_h * 3);
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * (static_cast<double>(src) / out_w) - 0.5;
            double fy = (oy + 0.5) * (static_cast<double>(src) / out_h) - 0.5;
            if (fx < 0) fx = 0;
            if (fy < 0) fy = 0;
            int x0 = static_cast<int>(std::floor(fx));
            int y0 = static_cast<int>(std::floor(fy));
            if (x0 > src - 1) x0 = src - 1;
            if (y0 > src - 1) y0 = src - 1;
            const int x1 = std::min(x0 + 1, src - 1);
            const int y1 = std::min(y0 + 1, src - 1);
            const double dx = fx - x0;
            const double dy = fy - y0;
            const double w00 = (1.0 - dx) * (1.0 - dy);
            const double w01 = dx * (1.0 - dy);
            const double w10 = (1.0 - dx) * dy;
            const double w11 = dx * dy;
            for (int c = 0; c < 3; ++c) {
                const double v = w00 * patch4x4[(y0 * src + x0) * 3 + c] +
                                 w01 * patch4x4[(y0 * src + x1) * 3 + c] +
                                 w10 * patch4x4[(y1 * src + x0) * 3 + c] +
                                 w11 * patch4x4[(y1 * src + x1) * 3 + c];
                out[(static_cast<std::size_t>(oy) * out_w + ox) * 3 + c] = v;
            }
        }
    }
    return out;
}

namespace {

struct Point {
    double recall;
    double precision;
};

// Greedy matching redone from scratch for one prediction subset.
void match_subset(const std::vector<Prediction>& subset, const Dataset& gt, int category_id,
                  double iou_threshold, std::size_t* tp, std::size_t* fp) {
    *tp = 0;
    *fp = 0;
    std::map<std::string, std::vector<const AnnotatedObject*>> gt_by_image;
    std::map<std::string, std::vector<bool>> used;
    for (const auto& rec : gt.images) {
        for (const auto& o : rec.objects)
            if (o.category_id == category_id) gt_by_image[rec.image_id].push_back(&o);
        used[rec.image_id].assign(gt_by_image[rec.image_id].size(), false);
    }

    std::vector<std::size_t> order(subset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return subset[a].score > subset[b].score;
    });

    for (const std::size_t pi : order) {
        const Prediction& p = subset[pi];
        auto& gts = gt_by_image[p.image_id];
        auto& flags = used[p.image_id];
        double best = 0.0;
        int best_k = -1;
        bool hits_difficult = false;
        for (std::size_t k = 0; k < gts.size(); ++k) {
            const double v = iou(box_of(p), box_of(*gts[k]));
            if (gts[k]->difficult) {
                if (v >= iou_threshold) hits_difficult = true;
                continue;
            }
            if (flags[k]) continue;
            if (v > best) {
                best = v;
                best_k = static_cast<int>(k);
            }
        }
        if (best_k >= 0 && best >= iou_threshold) {
            flags[best_k] = true;
            ++*tp;
        } else if (!hits_difficult) {
            ++*fp;
        }
    }
}

} // namespace

double oracle_average_precision(const std::vector<Prediction>& preds, const Dataset& gt,
                                int category_id, double iou_threshold, Interpolation interp) {
    std::vector<Prediction> class_preds;
    for (const auto& p : preds)
        if (p.category_id == category_id) class_preds.push_back(p);

    std::size_t npos = 0;
    for (const auto& rec : gt.images)
        for (const auto& o : rec.objects)
            if (o.category_id == category_id && !o.difficult) ++npos;

    if (npos == 0) return 0.0;

    std::set<double> distinct;
    for (const auto& p : class_preds) {
        if (distinct.count(p.score))
            throw std::logic_error("oracle requires pairwise-distinct scores");
        distinct.insert(p.score);
    }

    // One PR point per threshold, thresholds descending.
    std::vector<Point> points;
    for (auto it = distinct.rbegin(); it != distinct.rend(); ++it) {
        const double threshold = *it;
        std::vector<Prediction> subset;
        for (const auto& p : class_preds)
            if (p.score >= threshold) subset.push_back(p);
        std::size_t tp = 0, fp = 0;
        match_subset(subset, gt, category_id, iou_threshold, &tp, &fp);
        if (tp + fp == 0) continue; // whole prefix ignored (difficult-only overlaps)
        points.push_back({static_cast<double>(tp) / npos, static_cast<double>(tp) / (tp + fp)});
    }

    if (interp == Interpolation::eleven_point) {
        double sum = 0.0;
        for (int step = 0; step <= 10; ++step) {
            const double r = step / 10.0;
            double best = 0.0;
            for (const auto& pt : points)
                if (pt.recall >= r) best = std::max(best, pt.precision);
            sum += best;
        }
        return sum / 11.0;
    }

    // All-point: integrate max-precision-at-recall>=r over recall steps.
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double env = 0.0;
        for (std::size_t j = i; j < points.size(); ++j) env = std::max(env, points[j].precision);
        ap += (points[i].recall - prev_recall) * env;
        prev_recall = points[i].recall;
    }
    return ap;
}

} // namespace testsupport
