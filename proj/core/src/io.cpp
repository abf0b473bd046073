#include "triadic/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace triadic {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void CsvWriter::add_row(const std::vector<double>& row) {
    require(row.size() == header_.size(), "csv row width mismatch");
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (double v : row) cells.push_back(format_double(v));
    rows_.push_back(std::move(cells));
}

void CsvWriter::add_row_mixed(const std::vector<std::string>& row) {
    require(row.size() == header_.size(), "csv row width mismatch");
    rows_.push_back(row);
}

std::string CsvWriter::to_string() const {
    std::ostringstream out;
    for (size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
    out << '\n';
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    return out.str();
}

void CsvWriter::save(const std::string& path) const { write_text_file(path, to_string()); }

void SummaryWriter::set(const std::string& key, const std::string& value) {
    for (auto& kv : items_) {
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    }
    items_.emplace_back(key, value);
}

void SummaryWriter::set(const std::string& key, double value) { set(key, format_double(value)); }
void SummaryWriter::set(const std::string& key, long value) { set(key, std::to_string(value)); }

std::string SummaryWriter::to_string() const {
    std::ostringstream out;
    for (const auto& [k, v] : items_) out << k << '=' << v << '\n';
    return out.str();
}

void SummaryWriter::save(const std::string& path) const { write_text_file(path, to_string()); }

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace triadic
