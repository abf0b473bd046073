#pragma once

#include <map>
#include <string>
#include <vector>

#include "triadic/common.hpp"

namespace triadic {

/// Minimal CSV table writer with a fixed header.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}
    void add_row(const std::vector<double>& row);
    void add_row_mixed(const std::vector<std::string>& row);
    void save(const std::string& path) const;
    std::string to_string() const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Flat key=value run summary, insertion-ordered.
class SummaryWriter {
  public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long value);
    void save(const std::string& path) const;
    std::string to_string() const;

  private:
    std::vector<std::pair<std::string, std::string>> items_;
};

std::string format_double(double v);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace triadic
