#pragma once

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace phcav::io
{

using nlohmann::json;

/// Shortest text that round-trips the double exactly. Deterministic across runs.
std::string format_double(double value);

/// Column-oriented numeric table read from / written to CSV with a header row.
struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    /// Column by header name; throws ConfigError when absent.
    const std::vector<double> &column(const std::string &name) const;
};

Table read_csv(const std::filesystem::path &path);
void write_csv(const std::filesystem::path &path, const Table &table);

/// Little-endian float64, row-major, no header. Shape lives in the JSON sidecar.
void write_f64(const std::filesystem::path &path, std::span<const double> values);
std::vector<double> read_f64(const std::filesystem::path &path);

void write_json(const std::filesystem::path &path, const json &doc);
json read_json(const std::filesystem::path &path);

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(const std::string &text);
std::string sha256_file(const std::filesystem::path &path);

} // namespace phcav::io
