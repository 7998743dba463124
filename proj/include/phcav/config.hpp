#pragma once

// Plain-text config dialect shared by every subcommand:
//
//   # comment
//   [lattice]
//   a_nm = 305
//   rows = 32
//
//   [source]          ; sections may repeat (sources, probes)
//   x_nm = 0
//
// Keys carry their unit as a suffix (a_nm, d_nm, pump_area_um2, tau_sp_s).
// Keys before the first section header belong to the unnamed section "".

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phcav
{

class ConfigSection
{
public:
    ConfigSection(std::string name, int index) : name_(std::move(name)), index_(index) {}

    const std::string &name() const { return name_; }
    /// Occurrence index among sections with the same name.
    int index() const { return index_; }

    bool has(std::string_view key) const;
    std::string get_string(std::string_view key) const;
    std::string get_string(std::string_view key, std::string_view fallback) const;
    double get_double(std::string_view key) const;
    double get_double(std::string_view key, double fallback) const;
    long get_int(std::string_view key) const;
    long get_int(std::string_view key, long fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;

    /// Throws ConfigError naming the first key not in `allowed`.
    void require_known(const std::vector<std::string_view> &allowed) const;

    void set(const std::string &key, const std::string &value, int line);
    const std::map<std::string, std::string> &values() const { return values_; }

private:
    std::string qualified(std::string_view key) const;
    const std::string &raw(std::string_view key) const;

    std::string name_;
    int index_;
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
};

class Config
{
public:
    static Config parse(std::string_view text, std::string source = "<string>");
    static Config load(const std::filesystem::path &path);

    /// First section with this name; throws ConfigError when absent.
    const ConfigSection &section(std::string_view name) const;
    const ConfigSection *find(std::string_view name) const;
    std::vector<const ConfigSection *> all(std::string_view name) const;
    const std::vector<ConfigSection> &sections() const { return sections_; }

    /// Directory the config was loaded from; relative file keys resolve against it.
    const std::filesystem::path &base_dir() const { return base_dir_; }
    std::filesystem::path resolve(const std::string &file) const;

    /// Sections allowed in this config; anything else is a ConfigError.
    void require_sections(const std::vector<std::string_view> &allowed) const;

    const std::string &text() const { return text_; }

private:
    std::vector<ConfigSection> sections_;
    std::filesystem::path base_dir_;
    std::string text_;
    std::string source_;
};

} // namespace phcav
