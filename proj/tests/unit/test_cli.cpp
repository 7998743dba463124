#include "doctest.h"

#include "phcav/cli.hpp"
#include "phcav/io.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace phcav;
namespace fs = std::filesystem;
using io::json;

namespace
{
const fs::path source_dir = PHCAV_SOURCE_DIR;

struct Outcome
{
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string &name)
{
    fs::path dir = fs::temp_directory_path() / ("phcav_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_text(const fs::path &path, const std::string &text)
{
    std::ofstream(path) << text;
    return path;
}

std::string read_text(const fs::path &path)
{
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}
} // namespace

TEST_CASE("cli: missing config key exits 2 and names the key")
{
    const fs::path dir = fresh_dir("missing");
    const fs::path cfg = write_text(dir / "c.cfg", "[lattice]\na_nm = 305\nrows = 32\ncols = 25\n");
    const Outcome o = invoke({"--config", cfg.string(), "--out", (dir / "out").string(), "lattice"});
    CHECK(o.code == 2);
    CHECK(o.err.find("lattice.r_over_a_center") != std::string::npos);
}

TEST_CASE("cli: unknown keys, sections and subcommands exit 2")
{
    const fs::path dir = fresh_dir("unknown");
    const fs::path cfg = write_text(dir / "c.cfg", "[laser]\nq = 1e4\nwidget = 3\n");
    Outcome o = invoke({"--config", cfg.string(), "--out", (dir / "out").string(), "laser", "threshold"});
    CHECK(o.code == 2);
    CHECK(o.err.find("laser.widget") != std::string::npos);
    write_text(cfg, "[laser]\nq = 1e4\n[gizmo]\nx = 1\n");
    o = invoke({"--config", cfg.string(), "--out", (dir / "out").string(), "laser", "threshold"});
    CHECK(o.code == 2);
    CHECK(o.err.find("gizmo") != std::string::npos);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"laser"}).code == 2);
}

TEST_CASE("cli: fig1a lattice has 32 x 25 holes and is reproducible")
{
    const fs::path dir = fresh_dir("lattice");
    const std::string cfg = (source_dir / "configs" / "fig1a.cfg").string();
    REQUIRE(invoke({"--config", cfg, "--out", (dir / "a").string(), "lattice"}).code == 0);
    REQUIRE(invoke({"--config", cfg, "--out", (dir / "b").string(), "lattice"}).code == 0);
    const io::Table holes = io::read_csv(dir / "a" / "holes.csv");
    CHECK(holes.rows() == 800);
    const json ma = io::read_json(dir / "a" / "manifest.json");
    const json mb = io::read_json(dir / "b" / "manifest.json");
    CHECK(ma["outputs"] == mb["outputs"]);
    CHECK(ma["config_hash"] == mb["config_hash"]);
    CHECK(ma["command"] == "lattice");
    CHECK(ma["outputs"].size() >= 4);
    for (const auto &entry : ma["outputs"])
    {
        CHECK(entry["sha256"].get<std::string>() == io::sha256_file(dir / "a" / entry["path"].get<std::string>()));
    }
}

TEST_CASE("cli: manifest timestamp honours SOURCE_DATE_EPOCH")
{
    const fs::path dir = fresh_dir("epoch");
    const fs::path cfg = write_text(dir / "c.cfg", "[laser]\nq = 1e4\n");
    setenv("SOURCE_DATE_EPOCH", "86400", 1);
    const Outcome o = invoke({"--config", cfg.string(), "--out", (dir / "out").string(), "laser", "threshold"});
    unsetenv("SOURCE_DATE_EPOCH");
    REQUIRE(o.code == 0);
    const json m = io::read_json(dir / "out" / "manifest.json");
    CHECK(m["timestamps"]["finished_utc"] == "1970-01-02T00:00:00Z");
    CHECK(m["tool_version"].get<std::string>().size() > 0);
    CHECK(m["inputs"].size() == 1);
}

TEST_CASE("cli: vacuum box conserves energy and exits 0")
{
    const fs::path dir = fresh_dir("vacuum");
    const Outcome o = invoke({"--config", (source_dir / "configs" / "vacuum_box.cfg").string(), "--out",
                           (dir / "out").string(), "simulate"});
    CHECK(o.code == 0);
    const io::Table probe = io::read_csv(dir / "out" / "probe_00.csv");
    CHECK(probe.header == std::vector<std::string>{"step", "t_normalized", "value"});
    CHECK(probe.rows() == 12000);
    CHECK(fs::exists(dir / "out" / "energy.csv"));
    CHECK(fs::exists(dir / "out" / "run.json"));
}

TEST_CASE("cli: Courant violation exits 2")
{
    const fs::path dir = fresh_dir("cfl");
    std::string text = read_text(source_dir / "configs" / "vacuum_box.cfg");
    text.replace(text.find("courant = 0.5"), 13, "courant = 0.8");
    const fs::path cfg = write_text(dir / "c.cfg", text);
    const Outcome o = invoke({"--config", cfg.string(), "--out", (dir / "out").string(), "simulate"});
    CHECK(o.code == 2);
    CHECK(o.err.find("courant") != std::string::npos);
}

TEST_CASE("cli: laser ll writes a monotone curve")
{
    const fs::path dir = fresh_dir("ll");
    const Outcome o = invoke({"--config", (source_dir / "configs" / "defaults.cfg").string(), "--out",
                           (dir / "out").string(), "laser", "ll"});
    REQUIRE(o.code == 0);
    const io::Table t = io::read_csv(dir / "out" / "ll.csv");
    CHECK(t.header == std::vector<std::string>{"pump_uW", "N_cm3", "S_photons", "emitted_arb"});
    CHECK(t.rows() == 30);
    const auto &s = t.column("S_photons");
    for (std::size_t k = 1; k < s.size(); ++k)
    {
        CHECK(s[k] > s[k - 1]);
    }
    CHECK(io::read_json(dir / "out" / "ll.json")["monotone"] == true);
}

TEST_CASE("cli: light cone of the odd-odd fixture has no DC content")
{
    const fs::path dir = fresh_dir("lightcone");
    const Outcome o = invoke({"--input", (source_dir / "tests" / "data" / "odd_snapshot" / "snapshot.json").string(),
                           "--freq", "0.3", "--out", (dir / "out").string(), "modes", "lightcone"});
    REQUIRE(o.code == 0);
    const json r = io::read_json(dir / "out" / "lightcone.json");
    CHECK(r["dc_fraction"].get<double>() < 1e-20);
    CHECK(r["dc_fraction_untapered"].get<double>() < 1e-20);
    CHECK(fs::exists(dir / "out" / "fourier_power.f64"));
}

TEST_CASE("cli: Lorentzian fixture gives a loaded Q near 1.3e4")
{
    const fs::path dir = fresh_dir("lorentzian");
    const Outcome o = invoke({"--input", (source_dir / "tests" / "data" / "spectrum_1298p5.csv").string(), "--out",
                           (dir / "out").string(), "fit", "lorentzian"});
    REQUIRE(o.code == 0);
    const json r = io::read_json(dir / "out" / "lorentzian.json");
    CHECK(r["q_loaded"].get<double>() == doctest::Approx(12985.0).epsilon(1e-6));
}

TEST_CASE("cli: threshold, polarization and overlap fits from CSV")
{
    const fs::path dir = fresh_dir("fits");
    std::ostringstream ll;
    ll << "pump_uW,line_arb\n";
    for (int k = 0; k < 40; ++k)
    {
        const double p = 36.0 + 26.8 * k;
        ll << p << ',' << (p < 360.0 ? 0.05 * p : 18.0 + (p - 360.0)) << '\n';
    }
    write_text(dir / "ll.csv", ll.str());
    REQUIRE(invoke({"--input", (dir / "ll.csv").string(), "--out", (dir / "t").string(), "fit", "threshold"}).code == 0);
    CHECK(io::read_json(dir / "t" / "threshold_fit.json")["threshold_uW"].get<double>() ==
          doctest::Approx(360.0).epsilon(1.0 / 360.0));

    std::ostringstream pol;
    pol.precision(17);
    pol << "angle_deg,power_arb\n";
    for (int k = 0; k < 19; ++k)
    {
        const double c = std::cos(k * 10.0 * M_PI / 180.0);
        pol << k * 10.0 << ',' << 3.0 * c * c + 0.1 << '\n';
    }
    write_text(dir / "pol.csv", pol.str());
    REQUIRE(invoke({"--input", (dir / "pol.csv").string(), "--out", (dir / "p").string(), "fit", "polarization"}).code == 0);
    const json p = io::read_json(dir / "p" / "polarization.json");
    CHECK(p["p_max_arb"].get<double>() == doctest::Approx(3.1).epsilon(1e-9));
    CHECK(p["p_min_arb"].get<double>() == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(std::abs(std::remainder(p["theta0_deg"].get<double>(), 180.0)) < 1e-6);

    write_text(dir / "envelope.json", R"({"sigma_x_nm": 700, "sigma_y_nm": 500, "center_x_nm": 0, "center_y_nm": 0})");
    write_text(dir / "pos.csv", "x_nm,y_nm\n0,0\n1000,0\n");
    const fs::path cfg = write_text(dir / "o.cfg", "[overlap]\npump_area_um2 = 8\n");
    REQUIRE(invoke({"--config", cfg.string(), "--envelope", (dir / "envelope.json").string(), "--input",
                 (dir / "pos.csv").string(), "--out", (dir / "o").string(), "fit", "overlap"})
                .code == 0);
    const io::Table o = io::read_csv(dir / "o" / "overlap.csv");
    REQUIRE(o.rows() == 2);
    CHECK(o.column("relative_power")[0] == doctest::Approx(1.0));
    CHECK(o.column("relative_power")[1] < 1.0);
}

TEST_CASE("cli binary: process exit codes")
{
    const fs::path dir = fresh_dir("binary");
    const std::string bin = PHCAV_CLI;
    auto status = [](const std::string &cmd) {
        const int raw = std::system(cmd.c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    CHECK(status(bin + " --help > /dev/null") == 0);
    CHECK(status(bin + " --out " + (dir / "a").string() + " laser threshold --config " +
                 (source_dir / "configs" / "defaults.cfg").string() + " > /dev/null") == 0);
    CHECK(status(bin + " --config " + (dir / "nope.cfg").string() + " laser threshold 2> /dev/null") == 2);
}
