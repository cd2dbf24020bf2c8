#include "core/trigger.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace badbox {

namespace {

constexpr int kSeedPatchSize = 4;

inline std::uint8_t round_clamp_byte(double v) {
    const double r = std::floor(v + 0.5); // half-up
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

} // namespace

TriggerPattern generate_htba(int index, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1)
        fail(ErrorCode::invalid_argument, "trigger dimensions must be >= 1");
    if (index < 0) fail(ErrorCode::invalid_argument, "trigger index must be >= 0");

    // Seed patch bytes drawn row-major, channel-minor.
    DetRng rng(static_cast<std::uint64_t>(index));
    std::vector<std::uint8_t> seed_patch(kSeedPatchSize * kSeedPatchSize * 3);
    for (auto& b : seed_patch) b = static_cast<std::uint8_t>(rng.next_below(256));

    TriggerPattern out;
    out.width = out_width;
    out.height = out_height;
    out.rgb.resize(static_cast<std::size_t>(out_width) * out_height * 3);
    out.opacity.assign(static_cast<std::size_t>(out_width) * out_height, 1.0);

    const double scale_x = static_cast<double>(kSeedPatchSize) / out_width;
    const double scale_y = static_cast<double>(kSeedPatchSize) / out_height;
    for (int oy = 0; oy < out_height; ++oy) {
        const double fy = std::max(0.0, (oy + 0.5) * scale_y - 0.5);
        const int y0 = std::min(static_cast<int>(fy), kSeedPatchSize - 1);
        const int y1 = std::min(y0 + 1, kSeedPatchSize - 1);
        const double ty = fy - y0;
        for (int ox = 0; ox < out_width; ++ox) {
            const double fx = std::max(0.0, (ox + 0.5) * scale_x - 0.5);
            const int x0 = std::min(static_cast<int>(fx), kSeedPatchSize - 1);
            const int x1 = std::min(x0 + 1, kSeedPatchSize - 1);
            const double tx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double p00 = seed_patch[(y0 * kSeedPatchSize + x0) * 3 + c];
                const double p01 = seed_patch[(y0 * kSeedPatchSize + x1) * 3 + c];
                const double p10 = seed_patch[(y1 * kSeedPatchSize + x0) * 3 + c];
                const double p11 = seed_patch[(y1 * kSeedPatchSize + x1) * 3 + c];
                const double top = (1.0 - tx) * p00 + tx * p01;
                const double bottom = (1.0 - tx) * p10 + tx * p11;
                out.rgb[(static_cast<std::size_t>(oy) * out_width + ox) * 3 + c] =
                    round_clamp_byte((1.0 - ty) * top + ty * bottom);
            }
        }
    }
    return out;
}

TriggerPattern load_trigger(const std::string& image_path, double uniform_alpha) {
    if (uniform_alpha < 0.0 || uniform_alpha > 1.0)
        fail(ErrorCode::invalid_argument, "uniform_alpha must be in [0, 1]");
    ImageWithAlpha loaded = read_png(image_path);

    TriggerPattern out;
    out.width = loaded.image.width;
    out.height = loaded.image.height;
    out.rgb = std::move(loaded.image.rgb);
    const std::size_t n = static_cast<std::size_t>(out.width) * out.height;
    if (loaded.alpha) {
        out.opacity.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.opacity[i] = (*loaded.alpha)[i] / 255.0;
    } else {
        out.opacity.assign(n, uniform_alpha);
    }
    return out;
}

void save_trigger(const TriggerPattern& trig, const std::string& path) {
    Image img;
    img.width = trig.width;
    img.height = trig.height;
    img.rgb = trig.rgb;
    std::vector<std::uint8_t> alpha(trig.opacity.size());
    for (std::size_t i = 0; i < alpha.size(); ++i)
        alpha[i] = round_clamp_byte(trig.opacity[i] * 255.0);
    write_png_rgba(path, img, alpha);
}

BlendResult blend(Image& image, const TriggerPattern& trig, const Placement& placement,
                  double global_alpha) {
    if (image.width < 1 || image.height < 1)
        fail(ErrorCode::invalid_argument, "blend target image is empty");
    if (global_alpha < 0.0 || global_alpha > 1.0)
        fail(ErrorCode::invalid_argument, "global_alpha must be in [0, 1]");

    const long left = static_cast<long>(std::floor(placement.center_x + 0.5)) - trig.width / 2;
    const long top = static_cast<long>(std::floor(placement.center_y + 0.5)) - trig.height / 2;

    BlendResult result;
    result.cropped = left < 0 || top < 0 || left + trig.width > image.width ||
                     top + trig.height > image.height;

    const long x_begin = std::max(0L, left);
    const long y_begin = std::max(0L, top);
    const long x_end = std::min(static_cast<long>(image.width), left + trig.width);
    const long y_end = std::min(static_cast<long>(image.height), top + trig.height);

    for (long y = y_begin; y < y_end; ++y) {
        const long ty = y - top;
        for (long x = x_begin; x < x_end; ++x) {
            const long tx = x - left;
            const double a = global_alpha * trig.opacity[ty * trig.width + tx];
            for (int c = 0; c < 3; ++c) {
                const double src = image.at(static_cast<int>(x), static_cast<int>(y), c);
                const double pat = trig.rgb[(ty * trig.width + tx) * 3 + c];
                image.at(static_cast<int>(x), static_cast<int>(y), c) =
                    round_clamp_byte((1.0 - a) * src + a * pat);
            }
        }
    }
    return result;
}

} // namespace badbox
