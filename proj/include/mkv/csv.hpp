#pragma once
// CSV emission with shortest round-trip numeric formatting, so identical runs
// produce byte-identical files.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "mkv/common.hpp"

namespace mkv {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : path_(path) {
        out_.open(path, std::ios::binary);
        if (!out_) throw Error("cannot open '" + path + "' for writing");
        columns_ = header.size();
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw Error("ragged CSV row for '" + path_ + "'");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
    std::size_t columns_ = 0;
};

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(std::int64_t v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(std::uint64_t v) { return std::to_string(v); }
inline std::string cell(const std::string& v) { return v; }

}  // namespace mkv
