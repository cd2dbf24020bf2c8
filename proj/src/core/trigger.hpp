#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/image.hpp"

namespace badbox {

// Small RGB patch plus a per-pixel opacity plane shared across channels.
struct TriggerPattern {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // width * height * 3
    std::vector<double> opacity;   // width * height, each in [0, 1]

    friend bool operator==(const TriggerPattern&, const TriggerPattern&) = default;
};

// Resolved stamp location (the trigger rectangle is centered here).
struct Placement {
    double center_x = 0.0;
    double center_y = 0.0;
};

struct BlendResult {
    bool cropped = false; // footprint ran past an image border
};

// Square patch synthesis: a 4x4 RGB patch of uniform bytes seeded by
// `index`, bilinearly resized to the requested size (half-pixel sampling,
// edge clamp). Pure function of (index, out_width, out_height); opacity is
// all-ones.
TriggerPattern generate_htba(int index, int out_width, int out_height);

// Loads a PNG; the file's alpha channel (scaled to [0,1]) wins over
// uniform_alpha when present.
TriggerPattern load_trigger(const std::string& image_path, double uniform_alpha);

// Writes the pattern as RGBA PNG (opacity quantized to 8 bits).
void save_trigger(const TriggerPattern& trig, const std::string& path);

// Alpha blend per-pixel: out = (1 - a) * image + a * trigger with
// a = global_alpha * opacity, rounded half-up and clamped to [0,255].
// The footprint is the trigger rectangle centered at the placement point
// (top-left = round(center) - floor(size/2)), cropped at image borders;
// pixels outside it are untouched.
BlendResult blend(Image& image, const TriggerPattern& trig, const Placement& placement,
                  double global_alpha);

} // namespace badbox
