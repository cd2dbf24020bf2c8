#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "core/error.hpp"

namespace badbox {

// All files we emit use ordered_json: insertion-ordered keys make output
// bytes a pure function of content.
using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

inline ojson read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open '" + path + "' for reading");
    ojson j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, "malformed JSON in '" + path + "': " + e.what());
    }
    return j;
}

inline void write_json_file(const std::string& path, const ojson& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorCode::io, "write failed for '" + path + "'");
}

} // namespace badbox
