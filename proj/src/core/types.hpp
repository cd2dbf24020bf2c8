#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/error.hpp"

namespace badbox {

struct Category {
    int id = 0;
    std::string name;

    friend bool operator==(const Category&, const Category&) = default;
};

// Ordered category vocabulary. Ids unique, names unique, never empty.
class CategoryTable {
public:
    CategoryTable() = default;
    explicit CategoryTable(std::vector<Category> entries) { reset(std::move(entries)); }

    void reset(std::vector<Category> entries) {
        entries_ = std::move(entries);
        by_id_.clear();
        by_name_.clear();
        if (entries_.empty())
            fail(ErrorCode::invalid_argument, "category table must not be empty");
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (!by_id_.emplace(entries_[i].id, i).second)
                fail(ErrorCode::invalid_argument,
                     "duplicate category id " + std::to_string(entries_[i].id));
            if (!by_name_.emplace(entries_[i].name, i).second)
                fail(ErrorCode::invalid_argument, "duplicate category name '" + entries_[i].name + "'");
        }
    }

    const std::vector<Category>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    bool has_id(int id) const { return by_id_.count(id) != 0; }
    bool has_name(const std::string& name) const { return by_name_.count(name) != 0; }

    const std::string& name_of(int id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end())
            fail(ErrorCode::not_found, "unknown category id " + std::to_string(id));
        return entries_[it->second].name;
    }

    int id_of(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end())
            fail(ErrorCode::not_found, "unknown category name '" + name + "'");
        return entries_[it->second].id;
    }

    friend bool operator==(const CategoryTable& a, const CategoryTable& b) {
        return a.entries_ == b.entries_;
    }

private:
    std::vector<Category> entries_;
    std::unordered_map<int, std::size_t> by_id_;
    std::unordered_map<std::string, std::size_t> by_name_;
};

// One ground-truth box in center/size form.
struct AnnotatedObject {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    int category_id = 0;
    bool difficult = false;

    friend bool operator==(const AnnotatedObject&, const AnnotatedObject&) = default;
};

struct ImageRecord {
    std::string image_id;
    std::string pixel_path; // absolute, normalized; manifests store it relative
    int width = 0;
    int height = 0;
    std::vector<AnnotatedObject> objects;

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

enum class PlacementMode { bbox_center, random_location };

struct AttackSpec {
    std::string attacked_class;
    std::string target_class;
    double poison_rate = 0.0;
    int trigger_width = 0;
    int trigger_height = 0;
    double trigger_alpha = 1.0;
    PlacementMode placement_mode = PlacementMode::bbox_center;
    std::uint64_t master_seed = 0;

    friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

enum class ProvenanceKind { na, shadow, test_variant };

struct AttackProvenance {
    ProvenanceKind kind = ProvenanceKind::na;
    AttackSpec spec;
    std::uint64_t master_seed = 0;
    std::vector<std::string> selected_image_ids;
    std::optional<std::vector<std::string>> part_attack_categories;

    friend bool operator==(const AttackProvenance&, const AttackProvenance&) = default;
};

struct Dataset {
    CategoryTable categories;
    std::vector<ImageRecord> images;
    std::optional<AttackProvenance> provenance;

    const ImageRecord* find_image(const std::string& image_id) const {
        for (const auto& rec : images)
            if (rec.image_id == image_id) return &rec;
        return nullptr;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Validates the cross-field invariants a well-formed dataset must satisfy.
// Importers and the manifest loader call this; constructors stay cheap.
void validate_dataset(const Dataset& d);

} // namespace badbox
