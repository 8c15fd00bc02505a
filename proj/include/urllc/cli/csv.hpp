#pragma once

// CSV tables. The first line of every file is `# schema: <name> v<version>`,
// followed by a header row. Probabilities are written in scientific notation
// with six significant digits.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace urllc::cli {

/// Malformed or mismatched data file.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string fmt_prob(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", p);
    return buf;
}

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string fmt_fixed(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(std::string schema, int version, std::vector<std::string> header)
        : schema_(std::move(schema)), version_(version), columns_(header.size()) {
        out_ << "# schema: " << schema_ << " v" << version_ << "\n";
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::logic_error("csv row width does not match header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].find_first_of(",\"\n") != std::string::npos) {
                throw std::logic_error("csv cell needs quoting: " + cells[i]);
            }
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        ++rows_;
    }

    [[nodiscard]] std::string str() const { return out_.str(); }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_ - 1; }

private:
    std::string schema_;
    int version_;
    std::size_t columns_;
    std::size_t rows_ = 0;
    std::ostringstream out_;
};

struct CsvTable {
    std::string schema;
    int version = 0;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw DataError("column '" + name + "' missing from " + schema + " table");
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file");
    const std::string prefix = "# schema: ";
    if (line.rfind(prefix, 0) != 0) throw DataError("first line is not a schema comment");
    const std::string tag = line.substr(prefix.size());
    const auto sp = tag.rfind(" v");
    if (sp == std::string::npos) throw DataError("schema comment lacks a version");
    t.schema = tag.substr(0, sp);
    try {
        t.version = std::stoi(tag.substr(sp + 2));
    } catch (const std::exception&) {
        throw DataError("bad schema version in '" + line + "'");
    }
    if (!std::getline(in, line)) throw DataError("missing header row");
    t.header = split_csv_line(line);
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size()) {
            throw DataError("line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str());
}

}  // namespace urllc::cli
