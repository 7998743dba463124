#pragma once

// Command-line front end. Every subcommand reads one config file, writes its
// results under --out and finishes with a manifest.json listing the digests of
// everything it read and wrote.
//
// Exit codes: 0 success, 2 configuration or input error, 3 computation error.

#include "phcav/config.hpp"
#include "phcav/io.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace phcav::cli
{

struct Context
{
    std::optional<Config> config;
    std::filesystem::path out_dir = "out";
    int threads = 1;
    std::optional<std::size_t> max_mem_bytes;
    bool verbose = false;
    std::vector<std::filesystem::path> inputs;
    std::optional<std::filesystem::path> envelope;
    std::optional<double> freq;
    std::ostream *out = nullptr;
    std::ostream *err = nullptr;

    /// Files read and written so far, for the manifest.
    std::vector<std::filesystem::path> read_files;
    std::vector<std::string> written;

    const Config &cfg() const;
    /// First section of that name, or an empty stand-in when absent.
    const ConfigSection &section_or_empty(std::string_view name) const;
    const std::filesystem::path &input(std::size_t k = 0) const;

    /// Path of an output file under out_dir, registered for the manifest.
    std::filesystem::path output(const std::string &name);
    void emit_json(const std::string &name, const io::json &doc);
    void emit_csv(const std::string &name, const io::Table &table);
    void note_read(const std::filesystem::path &p);
    void log(const std::string &message) const;
};

int run_cli(int argc, const char *const *argv);
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

void cmd_lattice(Context &ctx);
void cmd_simulate(Context &ctx);
void cmd_modes(Context &ctx, const std::string &which);
void cmd_laser(Context &ctx, const std::string &which);
void cmd_fit(Context &ctx, const std::string &which);

void write_manifest(Context &ctx, const std::string &command);

} // namespace phcav::cli
