#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ngp/dataset.hpp"

namespace ngp {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline std::uint32_t read_be32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("unexpected end of IDX file");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace detail

// Target columns are given by header name or by 1-based position
// (numeric strings). Remaining columns become features in file order.
inline Dataset load_csv(const std::string& path,
                        const std::vector<std::string>& target_columns,
                        bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);
    if (target_columns.empty()) throw std::invalid_argument("no target columns given");

    std::string line;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (line_no == 1 && has_header) {
            header = cells;
            continue;
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw std::runtime_error("CSV file has no data rows: " + path);

    const std::size_t ncols = rows.front().size();
    if (has_header && header.size() != ncols)
        throw std::runtime_error("CSV header width differs from data width");

    // resolve target columns to 0-based positions
    std::vector<std::size_t> target_pos;
    for (const auto& spec : target_columns) {
        double num;
        if (detail::parse_double(spec, num) && num == std::floor(num)) {
            const long idx = static_cast<long>(num);
            if (idx < 1 || static_cast<std::size_t>(idx) > ncols)
                throw std::invalid_argument("target column " + spec + " out of range");
            target_pos.push_back(static_cast<std::size_t>(idx - 1));
        } else {
            if (!has_header)
                throw std::invalid_argument("target column name '" + spec +
                                            "' given but file has no header");
            auto it = std::find(header.begin(), header.end(), spec);
            if (it == header.end())
                throw std::invalid_argument("target column '" + spec + "' not found in header");
            target_pos.push_back(static_cast<std::size_t>(it - header.begin()));
        }
    }

    std::vector<bool> is_target(ncols, false);
    for (auto p : target_pos) {
        if (is_target[p]) throw std::invalid_argument("duplicate target column");
        is_target[p] = true;
    }
    const std::size_t q = target_pos.size();
    const std::size_t p_features = ncols - q;
    if (p_features == 0) throw std::invalid_argument("all columns marked as targets");

    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(p_features));
    out.targets.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(q));

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        const int file_line = static_cast<int>(r) + (has_header ? 2 : 1);
        if (cells.size() != ncols)
            throw std::runtime_error("CSV line " + std::to_string(file_line) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(ncols));
        std::size_t fc = 0;
        for (std::size_t c = 0; c < ncols; ++c) {
            double value;
            if (!detail::parse_double(cells[c], value))
                throw std::runtime_error("non-numeric cell at line " + std::to_string(file_line) +
                                         ", column " + std::to_string(c + 1) + ": '" + cells[c] +
                                         "'");
            if (is_target[c]) continue;
            out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(fc++)) = value;
        }
        for (std::size_t t = 0; t < q; ++t)
            out.targets(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) =
                std::stod(cells[target_pos[t]]);
    }

    if (has_header)
        for (std::size_t c = 0; c < ncols; ++c)
            if (!is_target[c]) out.feature_names.push_back(header[c]);

    out.validate();
    return out;
}

// IDX3 image + IDX1 label pair, big-endian, the MNIST container layout.
// Pixels are flattened row-major and scaled to [0,1]; labels become
// one-hot rows over max(label)+1 classes (computed over the whole file,
// so a truncated load keeps the full class count).
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                        std::optional<std::size_t> limit = std::nullopt) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open IDX image file: " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open IDX label file: " + labels_path);

    const std::uint32_t img_magic = detail::read_be32(img);
    if (img_magic != 0x00000803u)
        throw std::runtime_error("bad IDX3 magic in " + images_path);
    const std::uint32_t n_images = detail::read_be32(img);
    const std::uint32_t rows = detail::read_be32(img);
    const std::uint32_t cols = detail::read_be32(img);

    const std::uint32_t lab_magic = detail::read_be32(lab);
    if (lab_magic != 0x00000801u)
        throw std::runtime_error("bad IDX1 magic in " + labels_path);
    const std::uint32_t n_labels = detail::read_be32(lab);

    if (n_images != n_labels)
        throw std::runtime_error("IDX image/label count mismatch: " + std::to_string(n_images) +
                                 " images vs " + std::to_string(n_labels) + " labels");

    std::vector<unsigned char> labels(n_labels);
    if (n_labels > 0) {
        lab.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(n_labels));
        if (!lab) throw std::runtime_error("truncated IDX label file: " + labels_path);
    }
    unsigned max_label = 0;
    for (unsigned char l : labels) max_label = std::max<unsigned>(max_label, l);
    const auto q = static_cast<Eigen::Index>(max_label + 1);

    const std::size_t take = limit ? std::min<std::size_t>(*limit, n_images) : n_images;
    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;

    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(take), static_cast<Eigen::Index>(pixels));
    out.targets = Matrix::Zero(static_cast<Eigen::Index>(take), q);

    std::vector<unsigned char> buf(pixels);
    for (std::size_t i = 0; i < take; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
        if (!img) throw std::runtime_error("truncated IDX image file: " + images_path);
        for (std::size_t px = 0; px < pixels; ++px)
            out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(px)) =
                static_cast<double>(buf[px]) / 255.0;
        out.targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
    }

    out.validate();
    return out;
}

// CSV writer used by `generate`: feature columns then target columns,
// full round-trip precision.
inline void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV file: " + path);

    for (Eigen::Index c = 0; c < data.feature_count(); ++c) {
        if (c) out << ',';
        if (!data.feature_names.empty())
            out << data.feature_names[static_cast<std::size_t>(c)];
        else
            out << 'x' << (c + 1);
    }
    for (Eigen::Index t = 0; t < data.target_count(); ++t)
        out << ",t" << (data.target_count() > 1 ? std::to_string(t + 1) : "");

    char buf[64];
    out << '\n';
    for (Eigen::Index r = 0; r < data.sample_count(); ++r) {
        for (Eigen::Index c = 0; c < data.feature_count(); ++c) {
            if (c) out << ',';
            std::snprintf(buf, sizeof buf, "%.17g", data.features(r, c));
            out << buf;
        }
        for (Eigen::Index t = 0; t < data.target_count(); ++t) {
            std::snprintf(buf, sizeof buf, "%.17g", data.targets(r, t));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ngp
