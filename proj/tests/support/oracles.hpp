#pragma once

#include <cstdint>
#include <vector>

#include "core/metrics.hpp"
#include "core/types.hpp"

namespace testsupport {

// Direct 2D bilinear sample of a 4x4 patch at half-pixel centers with edge
// clamp, returned as unrounded reals. Written independently of the library
// (expanded four-weight form instead of nested lerps).
std::vector<double> oracle_bilinear_resize(const std::vector<std::uint8_t>& patch4x4, int out_w,
                                           int out_h);

// Brute-force average precision: enumerates every score threshold, redoes
// the greedy matching from scratch for each prefix, and integrates the
// precision envelope by quadratic scans. Requires pairwise-distinct scores;
// tie ordering is covered separately by the matching unit tests.
double oracle_average_precision(const std::vector<badbox::Prediction>& preds,
                                const badbox::Dataset& gt, int category_id, double iou_threshold,
                                badbox::Interpolation interp);

} // namespace testsupport
