#include "support/fixtures.hpp"

#include <filesystem>
#include <fstream>

#include "core/json_util.hpp"
#include "core/paths.hpp"
#include "core/rng.hpp"

namespace fs = std::filesystem;
using namespace badbox;

namespace testsupport {

Image synth_image(int width, int height, int variant) {
    Image img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            img.at(x, y, 0) = static_cast<std::uint8_t>((x * 7 + y * 3 + variant * 11) & 0xff);
            img.at(x, y, 1) = static_cast<std::uint8_t>((x * 5 + y * 13 + variant * 7) & 0xff);
            img.at(x, y, 2) = static_cast<std::uint8_t>((x * 11 + y * 17 + variant * 3) & 0xff);
        }
    }
    return img;
}

namespace {

std::string image_id_for(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "img%03zu", index);
    return buf;
}

CategoryTable make_table(const std::vector<std::string>& names) {
    std::vector<Category> cats;
    for (std::size_t i = 0; i < names.size(); ++i)
        cats.push_back({static_cast<int>(i), names[i]});
    return CategoryTable(std::move(cats));
}

} // namespace

Dataset build_pixel_corpus(const std::string& dir, const std::vector<std::string>& category_names,
                           int width, int height,
                           const std::vector<std::vector<ObjSpec>>& images_objects) {
    const std::string images_dir = (fs::path(dir) / "images").string();
    fs::create_directories(images_dir);

    Dataset d;
    d.categories = make_table(category_names);
    for (std::size_t i = 0; i < images_objects.size(); ++i) {
        ImageRecord rec;
        rec.image_id = image_id_for(i);
        rec.width = width;
        rec.height = height;
        rec.pixel_path =
            normalize_abs((fs::path(images_dir) / (rec.image_id + ".png")).string());
        write_png(rec.pixel_path, synth_image(width, height, static_cast<int>(i)));
        for (const auto& spec : images_objects[i]) {
            AnnotatedObject o;
            o.cx = spec.cx;
            o.cy = spec.cy;
            o.w = spec.w;
            o.h = spec.h;
            o.category_id = spec.cat;
            o.difficult = spec.difficult;
            rec.objects.push_back(o);
        }
        d.images.push_back(std::move(rec));
    }
    validate_dataset(d);
    return d;
}

Dataset build_random_corpus(const std::string& dir, const std::vector<std::string>& category_names,
                            int n_images, int n_with_attacked, int width, int height,
                            std::uint64_t seed) {
    DetRng rng(seed);
    std::vector<std::vector<ObjSpec>> all_objects;
    for (int i = 0; i < n_images; ++i) {
        std::vector<ObjSpec> objs;
        auto random_box = [&](int cat) {
            ObjSpec o;
            o.w = 8.0 + rng.next_real() * (width / 3.0);
            o.h = 8.0 + rng.next_real() * (height / 3.0);
            o.cx = o.w / 2.0 + rng.next_real() * (width - o.w);
            o.cy = o.h / 2.0 + rng.next_real() * (height - o.h);
            o.cat = cat;
            return o;
        };
        if (i < n_with_attacked) {
            const int n_attacked = 1 + static_cast<int>(rng.next_below(3));
            for (int k = 0; k < n_attacked; ++k) objs.push_back(random_box(0));
        }
        const int n_other = 1 + static_cast<int>(rng.next_below(3));
        for (int k = 0; k < n_other; ++k) {
            const int cat =
                1 + static_cast<int>(rng.next_below(category_names.size() - 1));
            objs.push_back(random_box(cat));
        }
        all_objects.push_back(std::move(objs));
    }
    return build_pixel_corpus(dir, category_names, width, height, all_objects);
}

VocFixture write_voc_fixture(const std::string& dir) {
    VocFixture fx;
    fx.annotation_dir = (fs::path(dir) / "annotations").string();
    fx.image_dir = (fs::path(dir) / "images").string();
    fx.split_list = (fs::path(dir) / "split.txt").string();
    fs::create_directories(fx.annotation_dir);
    fs::create_directories(fx.image_dir);

    struct VocObj {
        const char* name;
        int xmin, ymin, xmax, ymax;
        int difficult;
    };
    struct VocImg {
        const char* id;
        int width, height;
        std::vector<VocObj> objects;
    };
    // 6 objects total: 3 person (one difficult), 2 dog, 1 car.
    const std::vector<VocImg> images = {
        {"000001", 64, 48, {{"person", 0, 0, 10, 10, 0}, {"dog", 20, 10, 40, 30, 0}}},
        {"000002", 64, 48, {{"person", 5, 5, 25, 45, 0}, {"car", 30, 20, 60, 40, 0}}},
        {"000003", 64, 48, {{"person", 8, 8, 20, 20, 1}, {"dog", 1, 1, 30, 30, 0}}},
    };

    std::ofstream split(fx.split_list);
    for (const auto& img : images) {
        split << img.id << '\n';
        std::ofstream xml((fs::path(fx.annotation_dir) / (std::string(img.id) + ".xml")).string());
        xml << "<annotation>\n"
            << "  <filename>" << img.id << ".png</filename>\n"
            << "  <size><width>" << img.width << "</width><height>" << img.height
            << "</height><depth>3</depth></size>\n";
        for (const auto& o : img.objects) {
            xml << "  <object>\n"
                << "    <name>" << o.name << "</name>\n"
                << "    <difficult>" << o.difficult << "</difficult>\n"
                << "    <bndbox><xmin>" << o.xmin << "</xmin><ymin>" << o.ymin << "</ymin><xmax>"
                << o.xmax << "</xmax><ymax>" << o.ymax << "</ymax></bndbox>\n"
                << "  </object>\n";
        }
        xml << "</annotation>\n";
    }
    int variant = 0;
    for (const auto& img : images)
        write_png((fs::path(fx.image_dir) / (std::string(img.id) + ".png")).string(),
                  synth_image(img.width, img.height, variant++));
    return fx;
}

std::string write_coco_fixture(const std::string& dir) {
    fs::create_directories((fs::path(dir) / "images").string());
    ojson root;
    root["images"] = ojson::array();
    root["annotations"] = ojson::array();
    root["categories"] = ojson::array();

    const std::vector<std::pair<int, const char*>> cats = {{1, "person"}, {2, "dog"}, {3, "car"}};
    for (const auto& [id, name] : cats)
        root["categories"].push_back({{"id", id}, {"name", name}});

    for (int i = 1; i <= 5; ++i) {
        root["images"].push_back({{"id", i},
                                  {"file_name", "coco" + std::to_string(i) + ".png"},
                                  {"width", 64},
                                  {"height", 48}});
        write_png((fs::path(dir) / "images" / ("coco" + std::to_string(i) + ".png")).string(),
                  synth_image(64, 48, 100 + i));
    }

    // 8 kept boxes (4 person / 2 dog / 2 car), one crowd, one zero-area.
    int ann_id = 1;
    auto add = [&](int image_id, int cat, double x, double y, double w, double h, int iscrowd) {
        root["annotations"].push_back({{"id", ann_id++},
                                       {"image_id", image_id},
                                       {"category_id", cat},
                                       {"bbox", {x, y, w, h}},
                                       {"iscrowd", iscrowd}});
    };
    add(1, 1, 0, 0, 10, 10, 0);
    add(1, 2, 20, 10, 20, 20, 0);
    add(2, 1, 5, 5, 20, 40, 0);
    add(2, 3, 30, 20, 30, 20, 0);
    add(3, 1, 8, 8, 12, 12, 1); // crowd -> difficult
    add(3, 2, 1, 1, 29, 29, 0);
    add(4, 1, 2, 2, 30, 30, 0);
    add(5, 3, 10, 10, 40, 30, 0);
    add(5, 1, 0, 0, 0, 10, 0); // zero-area, must be rejected

    const std::string path = (fs::path(dir) / "instances.json").string();
    write_json_file(path, root);
    return path;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

bool datasets_equivalent(const Dataset& a, const std::string& base_a, const Dataset& b,
                         const std::string& base_b, std::string* why) {
    auto explain = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (!(a.categories == b.categories)) return explain("category tables differ");
    if (a.provenance.has_value() != b.provenance.has_value())
        return explain("provenance presence differs");
    if (a.provenance && !(*a.provenance == *b.provenance)) return explain("provenance differs");
    if (a.images.size() != b.images.size()) return explain("image counts differ");
    for (std::size_t i = 0; i < a.images.size(); ++i) {
        const auto& ra = a.images[i];
        const auto& rb = b.images[i];
        if (ra.image_id != rb.image_id || ra.width != rb.width || ra.height != rb.height ||
            !(ra.objects == rb.objects))
            return explain("image record '" + ra.image_id + "' differs");
        const std::string rel_a = relative_to(ra.pixel_path, base_a);
        const std::string rel_b = relative_to(rb.pixel_path, base_b);
        if (rel_a != rel_b)
            return explain("pixel path for '" + ra.image_id + "' differs: " + rel_a + " vs " +
                           rel_b);
        if (read_file_bytes(ra.pixel_path) != read_file_bytes(rb.pixel_path))
            return explain("pixel bytes for '" + ra.image_id + "' differ");
    }
    return true;
}

} // namespace testsupport
