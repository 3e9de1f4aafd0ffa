#ifndef NLPF_IO_HPP
#define NLPF_IO_HPP

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlpf/point_cloud.hpp"

namespace nlpf {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CloudFormat { kXyz, kPly };

inline CloudFormat format_from_path(const std::string& path) {
    auto ext = std::filesystem::path(path).extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(c));
    return ext == ".ply" ? CloudFormat::kPly : CloudFormat::kXyz;
}

namespace detail {

inline bool blank(const std::string& line) {
    for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

inline std::vector<double> parse_numbers(const std::string& line) {
    std::istringstream in(line);
    std::vector<double> values;
    double v;
    while (in >> v) values.push_back(v);
    if (!in.eof()) {
        in.clear();
        std::string rest;
        if (in >> rest) throw IoError("trailing garbage");
    }
    return values;
}

// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline PointCloud read_xyz(std::istream& in, const std::string& path) {
    PointCloud cloud;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        std::vector<double> vals;
        try {
            vals = parse_numbers(line);
        } catch (const IoError&) {
            vals.clear();
        }
        if (vals.size() != 3 || !std::isfinite(vals[0]) ||
            !std::isfinite(vals[1]) || !std::isfinite(vals[2])) {
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected 3 finite numbers");
        }
        cloud.emplace_back(vals[0], vals[1], vals[2]);
    }
    if (cloud.empty()) throw IoError(path + ": empty file");
    return cloud;
}

inline PointCloud read_ply(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw IoError(path + ": not a PLY file");

    long vertex_count = -1;
    int x_col = -1, y_col = -1, z_col = -1;
    int property_count = 0;
    bool ascii = false;
    bool in_vertex = false;
    bool extra_properties = false;
    int line_no = 1;

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = fmt == "ascii";
            if (!ascii) throw IoError(path + ": only ascii PLY supported");
        } else if (word == "comment" || word == "obj_info" || word.empty()) {
            continue;
        } else if (word == "element") {
            std::string name;
            long count = 0;
            ls >> name >> count;
            if (name == "vertex") {
                if (vertex_count >= 0)
                    throw IoError(path + ": duplicate vertex element");
                vertex_count = count;
                in_vertex = true;
            } else {
                if (vertex_count < 0)
                    throw IoError(path +
                                  ": element before vertex not supported");
                in_vertex = false;
            }
        } else if (word == "property") {
            if (!in_vertex) continue;
            std::string type, name;
            ls >> type >> name;
            if (type == "list")
                throw IoError(path + ": list property on vertex element");
            if (name == "x") x_col = property_count;
            else if (name == "y") y_col = property_count;
            else if (name == "z") z_col = property_count;
            else extra_properties = true;
            ++property_count;
        } else if (word == "end_header") {
            break;
        } else {
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": unknown header keyword '" + word + "'");
        }
    }
    if (vertex_count <= 0 || x_col < 0 || y_col < 0 || z_col < 0)
        throw IoError(path + ": missing vertex x/y/z properties");
    if (extra_properties)
        std::cerr << "warning: " << path
                  << ": extra vertex properties discarded\n";

    PointCloud cloud;
    cloud.reserve(static_cast<std::size_t>(vertex_count));
    for (long i = 0; i < vertex_count; ++i) {
        if (!std::getline(in, line))
            throw IoError(path + ": truncated vertex data");
        ++line_no;
        if (blank(line)) {
            --i;
            continue;
        }
        std::vector<double> vals;
        try {
            vals = parse_numbers(line);
        } catch (const IoError&) {
            vals.clear();
        }
        if (static_cast<int>(vals.size()) < property_count ||
            !std::isfinite(vals[x_col]) || !std::isfinite(vals[y_col]) ||
            !std::isfinite(vals[z_col])) {
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": malformed vertex line");
        }
        cloud.emplace_back(vals[x_col], vals[y_col], vals[z_col]);
    }
    if (cloud.empty()) throw IoError(path + ": empty file");
    return cloud;
}

}  // namespace detail

inline PointCloud read_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open");
    return format_from_path(path) == CloudFormat::kPly
               ? detail::read_ply(in, path)
               : detail::read_xyz(in, path);
}

/// Write a cloud atomically (temp file + rename) in the format implied by
/// the path extension.
inline void write_cloud(const PointCloud& cloud, const std::string& path) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError(path + ": cannot open for writing");
        if (format_from_path(path) == CloudFormat::kPly) {
            out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
                << "\nproperty double x\nproperty double y\nproperty double "
                   "z\nend_header\n";
        }
        for (const auto& p : cloud) {
            out << detail::format_double(p.x()) << ' '
                << detail::format_double(p.y()) << ' '
                << detail::format_double(p.z()) << '\n';
        }
        if (!out) throw IoError(path + ": write failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError(path + ": rename failed: " + ec.message());
    }
}

}  // namespace nlpf

#endif
