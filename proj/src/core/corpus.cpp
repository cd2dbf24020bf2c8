#include "core/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "core/paths.hpp"

namespace fs = std::filesystem;

namespace badbox {

void validate_dataset(const Dataset& d) {
    if (d.categories.empty())
        fail(ErrorCode::invalid_argument, "dataset has an empty category table");
    std::unordered_set<std::string> seen_ids;
    for (const auto& rec : d.images) {
        if (!seen_ids.insert(rec.image_id).second)
            fail(ErrorCode::invalid_argument, "duplicate image_id '" + rec.image_id + "'");
        if (rec.width < 1 || rec.height < 1)
            fail(ErrorCode::invalid_argument,
                 "image '" + rec.image_id + "' has non-positive dimensions");
        for (const auto& obj : rec.objects) {
            if (!(obj.w > 0.0 && obj.h > 0.0))
                fail(ErrorCode::invalid_argument,
                     "image '" + rec.image_id + "' has an object with non-positive size");
            if (!d.categories.has_id(obj.category_id))
                fail(ErrorCode::invalid_argument,
                     "image '" + rec.image_id + "' references unknown category id " +
                         std::to_string(obj.category_id));
            if (obj.cx < 0.0 || obj.cx > rec.width || obj.cy < 0.0 || obj.cy > rec.height)
                fail(ErrorCode::invalid_argument,
                     "image '" + rec.image_id + "' has an object centered outside the image");
            const double x0 = obj.cx - obj.w / 2.0, x1 = obj.cx + obj.w / 2.0;
            const double y0 = obj.cy - obj.h / 2.0, y1 = obj.cy + obj.h / 2.0;
            if (x1 <= 0.0 || y1 <= 0.0 || x0 >= rec.width || y0 >= rec.height)
                fail(ErrorCode::invalid_argument,
                     "image '" + rec.image_id + "' has a bbox outside the image rectangle");
        }
    }
    if (d.provenance) {
        if (!d.categories.has_name(d.provenance->spec.attacked_class) ||
            !d.categories.has_name(d.provenance->spec.target_class))
            fail(ErrorCode::invalid_argument,
                 "provenance references classes missing from the category table");
    }
}

const std::vector<std::string>& voc_default_classes() {
    static const std::vector<std::string> names = {
        "aeroplane", "bicycle", "bird", "boat", "bottle", "bus", "car",
        "cat", "chair", "cow", "diningtable", "dog", "horse", "motorbike",
        "person", "pottedplant", "sheep", "sofa", "train", "tvmonitor"};
    return names;
}

namespace {

CategoryTable table_from_names(const std::vector<std::string>& names) {
    std::vector<Category> entries;
    entries.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i)
        entries.push_back({static_cast<int>(i), names[i]});
    return CategoryTable(std::move(entries));
}

// Shared import-side screening: objects violating the dataset invariants
// are dropped and reported instead of poisoning the whole import.
bool screen_object(const AnnotatedObject& obj, int img_w, int img_h, std::string* reason) {
    if (!(obj.w > 0.0 && obj.h > 0.0)) {
        *reason = "zero-area box";
        return false;
    }
    if (obj.cx < 0.0 || obj.cx > img_w || obj.cy < 0.0 || obj.cy > img_h) {
        *reason = "box center outside image";
        return false;
    }
    const double x0 = obj.cx - obj.w / 2.0, x1 = obj.cx + obj.w / 2.0;
    const double y0 = obj.cy - obj.h / 2.0, y1 = obj.cy + obj.h / 2.0;
    if (x1 <= 0.0 || y1 <= 0.0 || x0 >= img_w || y0 >= img_h) {
        *reason = "box does not intersect image";
        return false;
    }
    return true;
}

std::vector<std::string> read_split_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open split list '" + path + "'");
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        const auto begin = line.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r\n");
        ids.push_back(line.substr(begin, end - begin + 1));
    }
    return ids;
}

} // namespace

ImportResult import_voc(const std::string& annotation_dir,
                        const std::string& image_dir,
                        const std::string& split_list,
                        const std::vector<std::string>& class_names) {
    ImportResult result;
    result.dataset.categories =
        table_from_names(class_names.empty() ? voc_default_classes() : class_names);

    const auto ids = read_split_list(split_list);

    std::string missing;
    for (const auto& id : ids) {
        const fs::path ann = fs::path(annotation_dir) / (id + ".xml");
        if (!fs::exists(ann)) missing += (missing.empty() ? "" : ", ") + id;
    }
    if (!missing.empty())
        fail(ErrorCode::not_found, "missing annotation file(s) for image id(s): " + missing);

    for (const auto& id : ids) {
        const fs::path ann_path = fs::path(annotation_dir) / (id + ".xml");
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::read_xml(ann_path.string(), tree);
        } catch (const boost::property_tree::xml_parser_error& e) {
            fail(ErrorCode::parse, "malformed XML in '" + e.filename() + "' at line " +
                                       std::to_string(e.line()) + ": " + e.message());
        }

        const auto ann = tree.get_child_optional("annotation");
        if (!ann)
            fail(ErrorCode::parse, "'" + ann_path.string() + "': missing <annotation> root");

        ImageRecord rec;
        rec.image_id = id;
        const std::string filename = ann->get<std::string>("filename", id + ".png");
        rec.pixel_path = normalize_abs((fs::path(image_dir) / filename).string());
        rec.width = ann->get<int>("size.width", 0);
        rec.height = ann->get<int>("size.height", 0);
        if (rec.width < 1 || rec.height < 1)
            fail(ErrorCode::parse, "'" + ann_path.string() + "': missing or invalid <size>");

        int obj_index = 0;
        for (const auto& [key, node] : *ann) {
            if (key != "object") continue;
            const std::string name = node.get<std::string>("name", "");
            if (!result.dataset.categories.has_name(name))
                fail(ErrorCode::not_found,
                     "'" + ann_path.string() + "': unknown category name '" + name + "'");

            const auto bnd = node.get_child_optional("bndbox");
            if (!bnd)
                fail(ErrorCode::parse, "'" + ann_path.string() + "': object without <bndbox>");
            const double xmin = bnd->get<double>("xmin");
            const double ymin = bnd->get<double>("ymin");
            const double xmax = bnd->get<double>("xmax");
            const double ymax = bnd->get<double>("ymax");

            AnnotatedObject obj;
            obj.cx = (xmin + xmax) / 2.0;
            obj.cy = (ymin + ymax) / 2.0;
            obj.w = xmax - xmin;
            obj.h = ymax - ymin;
            obj.category_id = result.dataset.categories.id_of(name);
            obj.difficult = node.get<int>("difficult", 0) != 0;

            std::string reason;
            if (screen_object(obj, rec.width, rec.height, &reason))
                rec.objects.push_back(obj);
            else
                result.report.rejected.push_back({id + "#" + std::to_string(obj_index), reason});
            ++obj_index;
        }
        result.dataset.images.push_back(std::move(rec));
    }

    validate_dataset(result.dataset);
    return result;
}

ImportResult import_coco(const std::string& annotation_json, const std::string& image_dir) {
    const ojson root = read_json_file(annotation_json);
    if (!root.contains("images") || !root.contains("annotations") || !root.contains("categories"))
        fail(ErrorCode::parse,
             "'" + annotation_json + "': expected images/annotations/categories collections");

    ImportResult result;
    std::vector<Category> cats;
    for (const auto& c : root.at("categories"))
        cats.push_back({c.at("id").get<int>(), c.at("name").get<std::string>()});
    result.dataset.categories = CategoryTable(std::move(cats));

    std::unordered_map<long long, std::size_t> image_index;
    for (const auto& im : root.at("images")) {
        const long long coco_id = im.at("id").get<long long>();
        ImageRecord rec;
        rec.image_id = std::to_string(coco_id);
        const std::string file_name =
            im.contains("file_name") ? im.at("file_name").get<std::string>()
                                     : rec.image_id + ".png";
        rec.pixel_path = normalize_abs((fs::path(image_dir) / file_name).string());
        rec.width = im.at("width").get<int>();
        rec.height = im.at("height").get<int>();
        image_index[coco_id] = result.dataset.images.size();
        result.dataset.images.push_back(std::move(rec));
    }

    for (const auto& a : root.at("annotations")) {
        const long long ann_id = a.contains("id") ? a.at("id").get<long long>() : -1;
        const long long img_ref = a.at("image_id").get<long long>();
        const auto it = image_index.find(img_ref);
        if (it == image_index.end())
            fail(ErrorCode::not_found, "annotation " + std::to_string(ann_id) +
                                           " references absent image id " + std::to_string(img_ref));
        ImageRecord& rec = result.dataset.images[it->second];

        const auto& bbox = a.at("bbox");
        const double x = bbox.at(0).get<double>();
        const double y = bbox.at(1).get<double>();
        const double w = bbox.at(2).get<double>();
        const double h = bbox.at(3).get<double>();

        AnnotatedObject obj;
        obj.cx = x + w / 2.0;
        obj.cy = y + h / 2.0;
        obj.w = w;
        obj.h = h;
        obj.category_id = a.at("category_id").get<int>();
        if (!result.dataset.categories.has_id(obj.category_id))
            fail(ErrorCode::not_found, "annotation " + std::to_string(ann_id) +
                                           " references unknown category id " +
                                           std::to_string(obj.category_id));
        obj.difficult = a.contains("iscrowd") && a.at("iscrowd").get<int>() != 0;

        std::string reason;
        if (screen_object(obj, rec.width, rec.height, &reason))
            rec.objects.push_back(obj);
        else
            result.report.rejected.push_back({std::to_string(ann_id), reason});
    }

    validate_dataset(result.dataset);
    return result;
}

const char* placement_mode_name(PlacementMode mode) {
    return mode == PlacementMode::bbox_center ? "bbox-center" : "random";
}

PlacementMode placement_mode_from_name(const std::string& name) {
    if (name == "bbox-center") return PlacementMode::bbox_center;
    if (name == "random") return PlacementMode::random_location;
    fail(ErrorCode::parse, "unknown placement mode '" + name + "'");
}

const char* provenance_kind_name(ProvenanceKind kind) {
    switch (kind) {
        case ProvenanceKind::na: return "na";
        case ProvenanceKind::shadow: return "shadow";
        case ProvenanceKind::test_variant: return "test-variant";
    }
    return "na";
}

ProvenanceKind provenance_kind_from_name(const std::string& name) {
    if (name == "na") return ProvenanceKind::na;
    if (name == "shadow") return ProvenanceKind::shadow;
    if (name == "test-variant") return ProvenanceKind::test_variant;
    fail(ErrorCode::parse, "unknown provenance kind '" + name + "'");
}

ojson attack_spec_to_json(const AttackSpec& spec) {
    ojson j;
    j["attacked_class"] = spec.attacked_class;
    j["target_class"] = spec.target_class;
    j["poison_rate"] = spec.poison_rate;
    j["trigger_width"] = spec.trigger_width;
    j["trigger_height"] = spec.trigger_height;
    j["trigger_alpha"] = spec.trigger_alpha;
    j["placement_mode"] = placement_mode_name(spec.placement_mode);
    j["master_seed"] = spec.master_seed;
    return j;
}

AttackSpec attack_spec_from_json(const ojson& j) {
    AttackSpec spec;
    spec.attacked_class = j.at("attacked_class").get<std::string>();
    spec.target_class = j.at("target_class").get<std::string>();
    spec.poison_rate = j.at("poison_rate").get<double>();
    spec.trigger_width = j.at("trigger_width").get<int>();
    spec.trigger_height = j.at("trigger_height").get<int>();
    spec.trigger_alpha = j.at("trigger_alpha").get<double>();
    spec.placement_mode = placement_mode_from_name(j.at("placement_mode").get<std::string>());
    spec.master_seed = j.at("master_seed").get<std::uint64_t>();
    return spec;
}

ojson provenance_to_json(const AttackProvenance& p) {
    ojson j;
    j["kind"] = provenance_kind_name(p.kind);
    j["spec"] = attack_spec_to_json(p.spec);
    j["master_seed"] = p.master_seed;
    j["selected_image_ids"] = p.selected_image_ids;
    if (p.part_attack_categories) j["part_attack_categories"] = *p.part_attack_categories;
    return j;
}

AttackProvenance provenance_from_json(const ojson& j) {
    AttackProvenance p;
    p.kind = provenance_kind_from_name(j.at("kind").get<std::string>());
    p.spec = attack_spec_from_json(j.at("spec"));
    p.master_seed = j.at("master_seed").get<std::uint64_t>();
    p.selected_image_ids = j.at("selected_image_ids").get<std::vector<std::string>>();
    if (j.contains("part_attack_categories"))
        p.part_attack_categories = j.at("part_attack_categories").get<std::vector<std::string>>();
    return p;
}

void export_manifest(const Dataset& d, const std::string& out_path) {
    const std::string out_abs = normalize_abs(out_path);
    const std::string base_dir = fs::path(out_abs).parent_path().string();
    fs::create_directories(base_dir);

    ojson j;
    j["schema_version"] = kManifestSchemaVersion;
    ojson cats = ojson::array();
    for (const auto& c : d.categories.entries())
        cats.push_back({{"id", c.id}, {"name", c.name}});
    j["categories"] = std::move(cats);

    ojson images = ojson::array();
    for (const auto& rec : d.images) {
        ojson im;
        im["image_id"] = rec.image_id;
        im["pixel_path"] = relative_to(rec.pixel_path, base_dir);
        im["width"] = rec.width;
        im["height"] = rec.height;
        ojson objs = ojson::array();
        for (const auto& o : rec.objects) {
            ojson jo;
            jo["cx"] = o.cx;
            jo["cy"] = o.cy;
            jo["w"] = o.w;
            jo["h"] = o.h;
            jo["category_id"] = o.category_id;
            jo["difficult"] = o.difficult;
            objs.push_back(std::move(jo));
        }
        im["objects"] = std::move(objs);
        images.push_back(std::move(im));
    }
    j["images"] = std::move(images);
    if (d.provenance) j["provenance"] = provenance_to_json(*d.provenance);

    write_json_file(out_abs, j);
}

Dataset load_manifest(const std::string& path) {
    const std::string abs = normalize_abs(path);
    const std::string base_dir = fs::path(abs).parent_path().string();
    const ojson j = read_json_file(abs);

    if (!j.contains("schema_version"))
        fail(ErrorCode::schema, "'" + path + "': manifest lacks schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kManifestSchemaVersion)
        fail(ErrorCode::schema, "'" + path + "': unsupported manifest schema_version " +
                                    std::to_string(version) + " (expected " +
                                    std::to_string(kManifestSchemaVersion) + ")");

    Dataset d;
    std::vector<Category> cats;
    for (const auto& c : j.at("categories"))
        cats.push_back({c.at("id").get<int>(), c.at("name").get<std::string>()});
    d.categories = CategoryTable(std::move(cats));

    for (const auto& im : j.at("images")) {
        ImageRecord rec;
        rec.image_id = im.at("image_id").get<std::string>();
        rec.pixel_path = resolve_from(im.at("pixel_path").get<std::string>(), base_dir);
        rec.width = im.at("width").get<int>();
        rec.height = im.at("height").get<int>();
        for (const auto& jo : im.at("objects")) {
            AnnotatedObject o;
            o.cx = jo.at("cx").get<double>();
            o.cy = jo.at("cy").get<double>();
            o.w = jo.at("w").get<double>();
            o.h = jo.at("h").get<double>();
            o.category_id = jo.at("category_id").get<int>();
            o.difficult = jo.at("difficult").get<bool>();
            rec.objects.push_back(o);
        }
        d.images.push_back(std::move(rec));
    }
    if (j.contains("provenance")) d.provenance = provenance_from_json(j.at("provenance"));

    validate_dataset(d);
    return d;
}

std::vector<std::string> images_with_class(const Dataset& d, int category_id) {
    if (!d.categories.has_id(category_id))
        fail(ErrorCode::not_found, "unknown category id " + std::to_string(category_id));
    std::vector<std::string> ids;
    for (const auto& rec : d.images) {
        const bool hit = std::any_of(rec.objects.begin(), rec.objects.end(),
                                     [&](const AnnotatedObject& o) {
                                         return o.category_id == category_id && !o.difficult;
                                     });
        if (hit) ids.push_back(rec.image_id);
    }
    return ids;
}

} // namespace badbox
