#include "phcav/io.hpp"

#include "phcav/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace phcav::io
{

std::string format_double(double value)
{
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc())
    {
        throw ComputeError("format_double: conversion failed");
    }
    return std::string(buf.data(), ptr);
}

const std::vector<double> &Table::column(const std::string &name) const
{
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
    {
        throw ConfigError("CSV is missing column '" + name + "'");
    }
    return columns[static_cast<std::size_t>(it - header.begin())];
}

Table read_csv(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open CSV '" + path.string() + "'");
    }
    Table table;
    std::string line;
    if (!std::getline(in, line))
    {
        throw ConfigError("CSV '" + path.string() + "' is empty");
    }
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ','))
        {
            cell.erase(std::remove_if(cell.begin(), cell.end(), [](char c) { return c == ' ' || c == '\r'; }),
                       cell.end());
            table.header.push_back(cell);
        }
    }
    table.columns.resize(table.header.size());
    int line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#')
        {
            continue;
        }
        std::istringstream ls(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ls, cell, ','))
        {
            if (col >= table.columns.size())
            {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": too many fields");
            }
            const auto first = cell.find_first_not_of(' ');
            const auto last = cell.find_last_not_of(' ');
            if (first == std::string::npos)
            {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty field");
            }
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data() + first, cell.data() + last + 1, v);
            if (ec != std::errc() || ptr != cell.data() + last + 1)
            {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number '" + cell + "'");
            }
            table.columns[col++].push_back(v);
        }
        if (col != table.columns.size())
        {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(table.columns.size()) + " fields");
        }
    }
    return table;
}

void write_csv(const std::filesystem::path &path, const Table &table)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw ComputeError("cannot write '" + path.string() + "'");
    }
    for (std::size_t c = 0; c < table.header.size(); ++c)
    {
        out << (c ? "," : "") << table.header[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r)
    {
        for (std::size_t c = 0; c < table.columns.size(); ++c)
        {
            out << (c ? "," : "") << format_double(table.columns[c][r]);
        }
        out << '\n';
    }
}

void write_f64(const std::filesystem::path &path, std::span<const double> values)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw ComputeError("cannot write '" + path.string() + "'");
    }
    if constexpr (std::endian::native == std::endian::little)
    {
        out.write(reinterpret_cast<const char *>(values.data()),
                  static_cast<std::streamsize>(values.size_bytes()));
    }
    else
    {
        for (double v : values)
        {
            auto bits = std::bit_cast<std::array<char, 8>>(v);
            std::reverse(bits.begin(), bits.end());
            out.write(bits.data(), 8);
        }
    }
}

std::vector<double> read_f64(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in)
    {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % 8 != 0)
    {
        throw ConfigError("'" + path.string() + "' is not a float64 array");
    }
    std::vector<double> values(bytes / 8);
    in.seekg(0);
    in.read(reinterpret_cast<char *>(values.data()), static_cast<std::streamsize>(bytes));
    if constexpr (std::endian::native != std::endian::little)
    {
        for (double &v : values)
        {
            auto raw = std::bit_cast<std::array<char, 8>>(v);
            std::reverse(raw.begin(), raw.end());
            v = std::bit_cast<double>(raw);
        }
    }
    return values;
}

void write_json(const std::filesystem::path &path, const json &doc)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw ComputeError("cannot write '" + path.string() + "'");
    }
    out << doc.dump(2) << '\n';
}

json read_json(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    try
    {
        return json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("'" + path.string() + "': " + e.what());
    }
}

std::string sha256_hex(std::span<const unsigned char> bytes)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1)
    {
        throw ComputeError("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i)
    {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_hex(const std::string &text)
{
    return sha256_hex(std::span(reinterpret_cast<const unsigned char *>(text.data()), text.size()));
}

std::string sha256_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

} // namespace phcav::io
