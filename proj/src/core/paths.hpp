#pragma once

#include <filesystem>
#include <string>

namespace badbox {

inline std::string normalize_abs(const std::string& path) {
    namespace fs = std::filesystem;
    return fs::absolute(fs::path(path)).lexically_normal().string();
}

// Relative form used inside manifests so artifact trees do not embed the
// directory they were produced in. Falls back to the absolute path when no
// relative form exists.
inline std::string relative_to(const std::string& abs_path, const std::string& base_dir) {
    namespace fs = std::filesystem;
    fs::path rel = fs::path(abs_path).lexically_relative(fs::path(base_dir));
    if (rel.empty()) return abs_path;
    return rel.generic_string();
}

inline std::string resolve_from(const std::string& stored, const std::string& base_dir) {
    namespace fs = std::filesystem;
    fs::path p(stored);
    if (p.is_absolute()) return p.lexically_normal().string();
    return (fs::path(base_dir) / p).lexically_normal().string();
}

} // namespace badbox
