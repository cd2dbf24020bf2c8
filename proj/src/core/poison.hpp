#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/trigger.hpp"
#include "core/types.hpp"

namespace badbox {

// Which images get poisoned and with what per-image seed. A plan is a pure
// function of (dataset, spec); per-image seeds depend only on
// (master_seed, image_id) so any processing schedule yields the same bytes.
struct PoisonPlan {
    std::vector<std::string> selected_image_ids; // manifest order
    std::unordered_map<std::string, std::uint64_t> per_image_seeds;
    AttackSpec spec;
};

struct ApplyOptions {
    std::string out_dir;  // poisoned pixels land under <out_dir>/...
    unsigned threads = 1;
};

struct PoisonOutput {
    Dataset dataset;
    std::vector<std::string> warnings;
};

struct TestVariants {
    Dataset benign;                  // input, untouched
    Dataset backdoored;              // triggered pixels, labels flipped to the target
    Dataset backdoored_benign;       // same pixels, original labels
    Dataset part_backdoored_benign;  // triggers on five drawn categories, original labels
    std::vector<std::string> warnings;
};

// Number of images to poison for a given rate over a universe:
// ceil(rate * universe), at least 1 while rate > 0, capped at the universe.
std::size_t selection_count(double rate, std::size_t universe);

// Splits the corpus into a selected subset and its untouched complement.
PoisonPlan plan_na(const Dataset& d, const AttackSpec& spec);

// Stamps one trigger per non-difficult attacked-class object in every
// selected image (at the box center, or at a seeded uniform point in random
// mode), rewrites those labels to the target class, and writes the modified
// pixels as new PNGs under out_dir. Everything else is carried over
// untouched; benign sources are never overwritten.
PoisonOutput apply_plan(const Dataset& d, const PoisonPlan& plan, const TriggerPattern& trig,
                        const ApplyOptions& opts);

// Full-universe poisoning over the attacked class.
PoisonOutput build_shadow(const Dataset& d_clean, const AttackSpec& spec,
                          const TriggerPattern& trig, const ApplyOptions& opts);

// The four evaluation datasets. Backdoored and hybrid share pixel files;
// the partial variant draws five categories (seeded) and stamps a trigger
// at the center of each of their boxes without touching any label.
TestVariants build_test_variants(const Dataset& d_test_benign, const AttackSpec& spec,
                                 const TriggerPattern& trig, const ApplyOptions& opts);

} // namespace badbox
