#pragma once

#include "isadm/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace isadm::detail {

using nlohmann::json;

/// Parses JSON, converting parse failures into DataError with the byte
/// position nlohmann reports.
inline json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(what + ": syntax error at byte " + std::to_string(e.byte) +
                        ": " + e.what());
    }
}

/// Rejects keys outside the allowed set. Used for objects where unknown
/// keys are errors (as opposed to top level, where they only warn).
inline void require_only_keys(const json& obj, std::initializer_list<const char*> allowed,
                              const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw DataError(where + ": unknown key \"" + key + "\"");
        }
    }
}

inline const json& require_key(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw DataError(where + ": missing required field \"" + key + "\"");
    }
    return *it;
}

inline std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require_key(obj, key, where);
    if (!v.is_string()) {
        throw DataError(where + ": field \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw IoError("read failure: " + path.string());
    }
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.good()) {
        throw IoError("write failure: " + path.string());
    }
}

/// FNV-1a 64-bit, stable across platforms and builds.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

} // namespace isadm::detail
