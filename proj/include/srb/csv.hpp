#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srb/types.hpp"

namespace srb::csv {

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

/// Simple comma-separated table with a mandatory header row. Values never
/// contain commas in any of this tool's schemas, so no quoting is handled.
class Table {
  public:
    explicit Table(const std::string& path) : path_(path) {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open file: " + path);
        std::string line;
        if (!std::getline(in, line))
            throw InputError(path + ": missing header row");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        header_ = split(line);
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            rows_.push_back(split(line));
        }
    }

    /// Column index; throws a schema error if absent.
    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header_.size(); ++i)
            if (header_[i] == name) return i;
        throw InputError(path_ + ": missing required column '" + name + "'");
    }

    std::size_t size() const { return rows_.size(); }

    /// 1-based line number of data row i (header is line 1).
    long line_number(std::size_t i) const { return static_cast<long>(i) + 2; }

    const std::string& cell(std::size_t row, std::size_t col) const {
        if (col >= rows_[row].size())
            throw InputError(path_ + " line " +
                             std::to_string(line_number(row)) +
                             ": too few fields");
        return rows_[row][col];
    }

    double num(std::size_t row, std::size_t col) const {
        const std::string& s = cell(row, col);
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw InputError(path_ + " line " +
                             std::to_string(line_number(row)) +
                             ": not a number: '" + s + "'");
        }
    }

    long integer(std::size_t row, std::size_t col) const {
        const double v = num(row, col);
        const long i = static_cast<long>(v);
        if (static_cast<double>(i) != v)
            throw InputError(path_ + " line " +
                             std::to_string(line_number(row)) +
                             ": not an integer: '" + cell(row, col) + "'");
        return i;
    }

    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace srb::csv
