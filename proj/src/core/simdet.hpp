#pragma once

#include <cstdint>
#include <vector>

#include "core/metrics.hpp"
#include "core/types.hpp"

namespace badbox {

// Behavioral knobs for the synthetic detector. Scores are uniform in
// [center - spread, center + spread], clamped to [0, 1]; emitted ground
// truths use the tp law, spurious boxes the fp law.
struct SimProfile {
    double detection_rate = 1.0;     // probability a ground-truth object is emitted
    double backdoor_fidelity = 1.0;  // probability a triggered attacked-class box flips
    double false_positive_rate = 0.0; // expected spurious boxes per image (Poisson)
    double loc_jitter_sigma = 0.0;   // pixels
    double tp_score_center = 0.9;
    double tp_score_spread = 0.05;
    double fp_score_center = 0.25;
    double fp_score_spread = 0.15;
    double degradation = 0.0; // cumulative pruning applied via degrade()

    friend bool operator==(const SimProfile&, const SimProfile&) = default;
};

void validate_profile(const SimProfile& p);

// Converts ground truth into predictions. The variant's provenance tells
// which boxes carry triggers; benign_twin supplies the pre-attack labels.
// Per-image streams are seeded by (seed, image_id), so output is identical
// under any processing schedule. Fully deterministic given (inputs, seed).
std::vector<Prediction> simulate(const Dataset& variant, const Dataset& benign_twin,
                                 const SimProfile& profile, std::uint64_t seed);

// Pruning stand-in: detection_rate and backdoor_fidelity both scale by
// (1 - pruning_rate); the applied amount accumulates in `degradation`.
SimProfile degrade(const SimProfile& profile, double pruning_rate);

} // namespace badbox
