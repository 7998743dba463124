#include "phcav/cli.hpp"
#include "phcav/error.hpp"
#include "phcav/fdtd.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <ctime>
#include <iostream>

namespace phcav::cli
{
namespace fs = std::filesystem;
using io::json;

namespace
{
std::string utc_timestamp()
{
    std::time_t t = std::time(nullptr);
    // Reproducible builds convention: a fixed clock when SOURCE_DATE_EPOCH is set.
    if (const char *epoch = std::getenv("SOURCE_DATE_EPOCH"))
    {
        char *end = nullptr;
        const long long v = std::strtoll(epoch, &end, 10);
        if (end != epoch && *end == '\0')
        {
            t = static_cast<std::time_t>(v);
        }
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

void write_manifest(Context &ctx, const std::string &command)
{
    json inputs = json::array();
    std::vector<fs::path> reads = ctx.read_files;
    std::sort(reads.begin(), reads.end());
    for (const auto &p : reads)
    {
        inputs.push_back({{"path", p.generic_string()}, {"sha256", io::sha256_file(p)}});
    }
    std::vector<std::string> names = ctx.written;
    std::sort(names.begin(), names.end());
    json outputs = json::array();
    for (const auto &n : names)
    {
        outputs.push_back({{"path", n}, {"sha256", io::sha256_file(ctx.out_dir / n)}});
    }
    json doc = {{"command", command},
                {"tool_version", PHCAV_VERSION},
                {"config_hash", ctx.config ? json(io::sha256_hex(ctx.config->text())) : json(nullptr)},
                {"timestamps", {{"finished_utc", utc_timestamp()}}},
                {"inputs", inputs},
                {"outputs", outputs}};
    fs::create_directories(ctx.out_dir);
    io::write_json(ctx.out_dir / "manifest.json", doc);
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Graded photonic-crystal cavity toolkit", "phcav"};
    app.require_subcommand(1);
    // Set before the subcommands exist so they inherit it: global options may follow them.
    app.fallthrough();

    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    double max_mem_mb = 0.0;
    bool verbose = false;
    std::vector<std::string> inputs;
    std::string envelope;
    double freq = 0.0;

    app.add_option("--config,--param", config_path, "Config file");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads for fdtd")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--max-mem", max_mem_mb, "Memory cap in MB for grids and snapshots")->check(CLI::PositiveNumber);
    app.add_flag("--verbose,-v", verbose, "Progress on standard error");
    app.add_option("--input,-i", inputs, "Input data file (repeatable)");
    app.add_option("--envelope", envelope, "envelope.json from 'modes envelope'");
    app.add_option("--freq", freq, "Mode frequency a/lambda (overrides modes.freq)");

    std::string command;
    std::string which;
    app.add_subcommand("lattice", "Hole list and dielectric grid")->callback([&] { command = "lattice"; });
    app.add_subcommand("simulate", "2D TE FDTD run")->callback([&] { command = "simulate"; });
    auto add_group = [&](const std::string &name, const std::string &help, std::vector<std::pair<std::string, std::string>> leaves) {
        auto *group = app.add_subcommand(name, help);
        group->require_subcommand(1);
        for (const auto &[leaf, leaf_help] : leaves)
        {
            group->add_subcommand(leaf, leaf_help)->callback([&command, &which, name, leaf] {
                command = name;
                which = leaf;
            });
        }
    };
    add_group("modes", "Mode analysis", {{"resonances", "Harmonic inversion of probe records"},
                                        {"volume", "Effective mode volume of a snapshot"},
                                        {"lightcone", "Spatial spectrum and light-cone fraction"},
                                        {"envelope", "Gaussian envelope of a snapshot"}});
    add_group("laser", "Rate-equation model", {{"steady", "Steady state at each pump power"},
                                              {"ll", "Light-in light-out curve"},
                                              {"threshold", "Analytic threshold and transparency"}});
    add_group("fit", "Data fits", {{"lorentzian", "Linewidth and loaded Q of a spectrum"},
                                {"threshold", "Two-segment knee of an L-L curve"},
                                {"polarization", "Malus-law fit of power vs angle"},
                                {"overlap", "Pump overlap vs beam position"}});

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e, out, err);
        return 2;
    }

    Context ctx;
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    ctx.verbose = verbose;
    ctx.out = &out;
    ctx.err = &err;
    for (const auto &i : inputs)
    {
        ctx.inputs.emplace_back(i);
    }
    if (!envelope.empty())
    {
        ctx.envelope = envelope;
    }
    if (app.count("--freq") > 0)
    {
        ctx.freq = freq;
    }
    if (max_mem_mb > 0.0)
    {
        ctx.max_mem_bytes = static_cast<std::size_t>(max_mem_mb * 1048576.0);
    }
    const std::string label = which.empty() ? command : command + " " + which;
    try
    {
        if (!config_path.empty())
        {
            ctx.config = Config::load(config_path);
            ctx.note_read(config_path);
        }
        if (command == "lattice")
        {
            cmd_lattice(ctx);
        }
        else if (command == "simulate")
        {
            cmd_simulate(ctx);
        }
        else if (command == "modes")
        {
            cmd_modes(ctx, which);
        }
        else if (command == "laser")
        {
            cmd_laser(ctx, which);
        }
        else if (command == "fit")
        {
            cmd_fit(ctx, which);
        }
        write_manifest(ctx, label);
        return 0;
    }
    catch (const ConfigError &e)
    {
        err << "phcav " << label << ": error: " << e.what() << '\n';
        return 2;
    }
    catch (const fdtd::DivergenceError &e)
    {
        err << "phcav " << label << ": diverged at step " << e.step() << ": " << e.what() << '\n';
        return 3;
    }
    catch (const ComputeError &e)
    {
        err << "phcav " << label << ": compute error: " << e.what() << '\n';
        // Partial outputs stay listed so a failed run is still auditable.
        try
        {
            write_manifest(ctx, label);
        }
        catch (const std::exception &)
        {
        }
        return 3;
    }
    catch (const std::exception &e)
    {
        err << "phcav " << label << ": " << e.what() << '\n';
        return 1;
    }
}

int run_cli(int argc, const char *const *argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
    {
        args.emplace_back(argv[i]);
    }
    return run_cli(args, std::cout, std::cerr);
}

} // namespace phcav::cli
