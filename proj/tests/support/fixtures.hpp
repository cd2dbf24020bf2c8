#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/types.hpp"

namespace testsupport {

// Deterministic pixel pattern; `variant` decorrelates images.
badbox::Image synth_image(int width, int height, int variant);

struct ObjSpec {
    double cx, cy, w, h;
    int cat = 0;
    bool difficult = false;
};

// Writes one PNG per image under <dir>/images and returns the matching
// in-memory dataset. images_objects[i] describes image i ("img000"...).
badbox::Dataset build_pixel_corpus(const std::string& dir,
                                   const std::vector<std::string>& category_names, int width,
                                   int height, const std::vector<std::vector<ObjSpec>>& images_objects);

// Seeded bulk corpus: exactly n_with_attacked images contain >= 1 object of
// category 0; every image gets filler objects of other categories.
badbox::Dataset build_random_corpus(const std::string& dir,
                                    const std::vector<std::string>& category_names, int n_images,
                                    int n_with_attacked, int width, int height,
                                    std::uint64_t seed);

// Hand-written three-image VOC fixture (annotations/, images/, split.txt).
// Ground truth counts: img per object list below; person in 2 of 3 images.
struct VocFixture {
    std::string annotation_dir;
    std::string image_dir;
    std::string split_list;
};
VocFixture write_voc_fixture(const std::string& dir);

// Hand-written five-image COCO fixture. Returns the annotation JSON path.
std::string write_coco_fixture(const std::string& dir);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

// Structural dataset equality that tolerates different artifact roots:
// pixel paths must agree relative to their base and point at byte-identical
// files; every other field must match exactly.
bool datasets_equivalent(const badbox::Dataset& a, const std::string& base_a,
                         const badbox::Dataset& b, const std::string& base_b,
                         std::string* why = nullptr);

} // namespace testsupport
