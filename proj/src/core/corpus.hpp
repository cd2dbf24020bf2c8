#pragma once

#include <string>
#include <vector>

#include "core/json_util.hpp"
#include "core/types.hpp"

namespace badbox {

// Annotations dropped at import time. "annotation_id" is the VOC object
// position ("<image>#<index>") or the COCO annotation id.
struct Rejection {
    std::string annotation_id;
    std::string reason;

    friend bool operator==(const Rejection&, const Rejection&) = default;
};

struct ImportReport {
    std::vector<Rejection> rejected;
    std::vector<std::string> warnings;
};

struct ImportResult {
    Dataset dataset;
    ImportReport report;
};

// The standard 20-class vocabulary used when a VOC corpus comes without an
// explicit class list.
const std::vector<std::string>& voc_default_classes();

// VOC: one XML file per image id listed in split_list; corner boxes are
// converted to center/size at the boundary. Object names outside the
// vocabulary are an error, not a rejection.
ImportResult import_voc(const std::string& annotation_dir,
                        const std::string& image_dir,
                        const std::string& split_list,
                        const std::vector<std::string>& class_names = {});

// COCO: single JSON with images/annotations/categories. iscrowd maps to
// difficult; zero-area boxes are rejected and reported.
ImportResult import_coco(const std::string& annotation_json,
                         const std::string& image_dir);

// Manifest round-trip. Pixel paths are stored relative to the manifest's
// directory and resolved back to absolute form on load.
inline constexpr int kManifestSchemaVersion = 1;
void export_manifest(const Dataset& d, const std::string& out_path);
Dataset load_manifest(const std::string& path);

// Ids of images holding at least one non-difficult object of the category,
// in manifest order.
std::vector<std::string> images_with_class(const Dataset& d, int category_id);

const char* placement_mode_name(PlacementMode mode);
PlacementMode placement_mode_from_name(const std::string& name);
const char* provenance_kind_name(ProvenanceKind kind);
ProvenanceKind provenance_kind_from_name(const std::string& name);

ojson attack_spec_to_json(const AttackSpec& spec);
AttackSpec attack_spec_from_json(const ojson& j);
ojson provenance_to_json(const AttackProvenance& p);
AttackProvenance provenance_from_json(const ojson& j);

} // namespace badbox
