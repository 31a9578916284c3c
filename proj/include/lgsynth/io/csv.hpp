#pragma once

#include "lgsynth/io/key_value.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgsynth::io {

/// Comma-separated table with a mandatory header row. Numbers are written in
/// their shortest round-trip form with '.' as decimal separator.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    class Row {
    public:
        Row& operator<<(double v) { return add(format_double(v)); }
        Row& operator<<(std::size_t v) { return add(std::to_string(v)); }
        Row& operator<<(long v) { return add(std::to_string(v)); }
        Row& operator<<(const std::string& v) { return add(v); }
        Row& operator<<(const char* v) { return add(v); }

    private:
        friend class CsvTable;
        explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
        Row& add(std::string v) {
            cells_.push_back(std::move(v));
            return *this;
        }
        std::vector<std::string>& cells_;
    };

    Row row() {
        rows_.emplace_back();
        return Row(rows_.back());
    }

    [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }

    void write(std::ostream& out) const {
        write_line(out, header_);
        for (const auto& r : rows_) {
            if (r.size() != header_.size()) throw std::logic_error("CsvTable: row width differs from header");
            write_line(out, r);
        }
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path);
        write(f);
    }

private:
    static void write_line(std::ostream& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace lgsynth::io
