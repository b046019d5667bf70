// Bit-stable result emission: CSV rows with 17-significant-digit numbers
// (enough for exact double round-trip) plus a JSON summary, both written
// atomically (write to a temp file, then rename) so outputs only ever
// appear complete.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace polymerlab {

inline constexpr const char* kCsvSchemaHeader = "# polymerlab-schema v1";

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> columns) : ncols_(columns.size()) {
        body_ = std::string(kCsvSchemaHeader) + "\n";
        append_row(columns);
    }

    CsvBuilder& cell(const std::string& s) {
        row_.push_back(s);
        return *this;
    }
    CsvBuilder& cell(double v) { return cell(format_double(v)); }
    CsvBuilder& cell(std::int64_t v) { return cell(std::to_string(v)); }
    CsvBuilder& cell(int v) { return cell(std::to_string(v)); }
    CsvBuilder& cell(bool v) { return cell(std::string(v ? "1" : "0")); }

    void end_row() {
        if (row_.size() != ncols_) {
            throw std::logic_error("CsvBuilder: row width mismatch");
        }
        append_row(row_);
        row_.clear();
    }

    const std::string& str() const {
        if (!row_.empty()) throw std::logic_error("CsvBuilder: unterminated row");
        return body_;
    }

private:
    void append_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += cells[i];
        }
        body_ += '\n';
    }

    std::size_t ncols_;
    std::string body_;
    std::vector<std::string> row_;
};

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// JSON value helper: doubles that are not finite are represented as
// null (JSON has no inf/nan literals).
inline nlohmann::ordered_json json_number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

} // namespace polymerlab
