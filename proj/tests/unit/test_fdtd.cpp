#include "doctest.h"

#include "phcav/error.hpp"
#include "phcav/fdtd.hpp"
#include "phcav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace phcav;
using namespace phcav::fdtd;
using geometry::DielectricGrid;

namespace
{
// Dielectric block with a few air inclusions, mirror symmetric about both axes.
DielectricGrid patterned_grid(int n, double dx_nm)
{
    DielectricGrid g = geometry::uniform_grid(n, n, dx_nm, 1.0, 100.0);
    for (int j = 0; j < n; ++j)
    {
        for (int i = 0; i < n; ++i)
        {
            const double x = g.cell_x_nm(i);
            const double y = g.cell_y_nm(j);
            const double fx = std::abs(std::fmod(std::abs(x), 100.0) - 50.0);
            const double fy = std::abs(std::fmod(std::abs(y), 100.0) - 50.0);
            g.at(i, j) = (fx * fx + fy * fy < 25.0 * 25.0) ? 1.0 : 9.0;
        }
    }
    return g;
}

SourceSpec pulse(double x, double y, Component c = Component::Hz)
{
    SourceSpec s;
    s.x_nm = x;
    s.y_nm = y;
    s.component = c;
    s.center_freq = 0.3;
    s.bandwidth = 0.1;
    return s;
}

double max_rel_diff(const std::vector<double> &a, const std::vector<double> &b)
{
    double peak = 0.0;
    double diff = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
    {
        peak = std::max(peak, std::abs(a[k]));
        diff = std::max(diff, std::abs(a[k] - b[k]));
    }
    return diff / peak;
}
} // namespace

TEST_CASE("source pulse is a Gaussian-modulated sinusoid inside its window")
{
    const SourceSpec s = pulse(0.0, 0.0);
    const double dt = 0.05;
    CHECK(s.sigma_t() == doctest::Approx(1.0 / (2.0 * M_PI * 0.1)));
    CHECK(s.peak_time(dt) == doctest::Approx(4.0 / 0.1));
    CHECK(s.window_end(dt) == doctest::Approx(8.0 / 0.1));
    CHECK(s.value(s.window_end(dt) + 1.0, dt) == 0.0);
    const double quarter = 0.25 / s.center_freq;
    const double sig = s.sigma_t();
    CHECK(s.value(s.peak_time(dt), dt) == 0.0);
    CHECK(s.value(s.peak_time(dt) + quarter, dt) ==
          doctest::Approx(std::exp(-0.5 * quarter * quarter / (sig * sig))).epsilon(1e-14));
}

TEST_CASE("config validation rejects CFL violations and bad inputs")
{
    const DielectricGrid g = geometry::uniform_grid(64, 64, 10.0, 1.0, 100.0);
    SimConfig cfg;
    cfg.grid = &g;
    cfg.n_steps = 10;
    cfg.courant = 0.8;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(run(cfg), ConfigError);
    cfg.courant = 0.5;
    cfg.n_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.n_steps = 10;
    cfg.threads = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.threads = 1;
    cfg.pml.thickness_cells = 4;
    CHECK_THROWS_AS(run(cfg), ConfigError);
    cfg.pml.thickness_cells = 12;
    cfg.probes.push_back({1e6, 0.0, Component::Hz});
    CHECK_THROWS_AS(run(cfg), ConfigError);
    CHECK_THROWS_AS(component_from_string("Bz"), ConfigError);
    CHECK_THROWS_AS(symmetry_from_string("skew"), ConfigError);
}

TEST_CASE("zero fields without sources stay identically zero")
{
    const DielectricGrid g = patterned_grid(48, 10.0);
    SimConfig cfg;
    cfg.grid = &g;
    cfg.n_steps = 300;
    cfg.probes = {{30.0, -40.0, Component::Hz}, {0.0, 0.0, Component::Ex}};
    cfg.energy_stride = 50;
    const RunResult r = run(cfg);
    for (const auto &rec : r.records)
    {
        CHECK(std::all_of(rec.samples.begin(), rec.samples.end(), [](double v) { return v == 0.0; }));
    }
    for (const auto &e : r.energy)
    {
        CHECK(e.energy == 0.0);
    }
}

TEST_CASE("violated CFL diverges and is reported with the step")
{
    const DielectricGrid g = geometry::uniform_grid(48, 48, 10.0, 1.0, 100.0);
    SimConfig cfg;
    cfg.grid = &g;
    cfg.courant = 0.8;
    cfg.allow_unstable = true;
    cfg.boundary = Boundary::pec;
    cfg.n_steps = 2000;
    cfg.sources = {pulse(10.0, 20.0)};
    cfg.probes = {{0.0, 0.0, Component::Hz}};
    cfg.energy_stride = 1;
    long failed = -1;
    try
    {
        run(cfg);
    }
    catch (const DivergenceError &e)
    {
        failed = e.step();
    }
    CHECK(failed > 0);
    CHECK(failed <= 2000);
}

TEST_CASE("closed PEC box conserves the discrete energy after the source")
{
    const DielectricGrid g = patterned_grid(40, 10.0);
    SimConfig cfg;
    cfg.grid = &g;
    cfg.boundary = Boundary::pec;
    cfg.sources = {pulse(-55.0, 35.0)};
    cfg.energy_stride = 100;
    cfg.n_steps = 10000;
    const RunResult r = run(cfg);
    const double t_off = cfg.sources[0].window_end(r.dt);
    double lo = 1e300;
    double hi = 0.0;
    for (const auto &e : r.energy)
    {
        if (e.time > t_off)
        {
            lo = std::min(lo, e.energy);
            hi = std::max(hi, e.energy);
        }
    }
    REQUIRE(hi > 0.0);
    CHECK((hi - lo) / hi < 1e-10);
}

TEST_CASE("PML drains energy monotonically after the source")
{
    const DielectricGrid g = patterned_grid(64, 10.0);
    SimConfig cfg;
    cfg.grid = &g;
    cfg.sources = {pulse(-55.0, 35.0)};
    cfg.energy_stride = 20;
    cfg.n_steps = 3000;
    const RunResult r = run(cfg);
    const double t_off = cfg.sources[0].window_end(r.dt);
    double prev = 1e300;
    double peak = 0.0;
    int checked = 0;
    for (const auto &e : r.energy)
    {
        peak = std::max(peak, e.energy);
        if (e.time > t_off)
        {
            CHECK(e.energy <= prev);
            prev = e.energy;
            ++checked;
        }
    }
    CHECK(checked > 10);
    CHECK(r.energy.back().energy < 1e-3 * peak);
}

TEST_CASE("records are bit-identical for any thread count")
{
    const DielectricGrid g = patterned_grid(64, 10.0);
    SimConfig cfg;
    cfg.grid = &g;
    cfg.sources = {pulse(-55.0, 35.0)};
    cfg.probes = {{120.0, -80.0, Component::Hz}, {-10.0, 200.0, Component::Ey}};
    cfg.n_steps = 1200;
    cfg.snapshot_stride = 400;
    cfg.energy_stride = 100;
    const RunResult one = run(cfg);
    for (int threads : {2, 3, 7})
    {
        cfg.threads = threads;
        const RunResult many = run(cfg);
        REQUIRE(many.records.size() == one.records.size());
        for (std::size_t p = 0; p < one.records.size(); ++p)
        {
            CHECK(many.records[p].samples == one.records[p].samples);
        }
        REQUIRE(many.snapshots.size() == one.snapshots.size());
        for (std::size_t s = 0; s < one.snapshots.size(); ++s)
        {
            CHECK(many.snapshots[s].hz == one.snapshots[s].hz);
            CHECK(many.snapshots[s].ex == one.snapshots[s].ex);
        }
        for (std::size_t k = 0; k < one.energy.size(); ++k)
        {
            CHECK(many.energy[k].energy == one.energy[k].energy);
        }
    }
}

TEST_CASE("swapping source and probe in a closed lossless box gives the same waveform")
{
    const DielectricGrid g = patterned_grid(40, 10.0);
    SimConfig cfg;
    cfg.grid = &g;
    cfg.boundary = Boundary::pec;
    cfg.n_steps = 3000;
    cfg.sources = {pulse(-95.0, 35.0)};
    cfg.probes = {{75.0, -115.0, Component::Hz}};
    const RunResult ab = run(cfg);
    cfg.sources = {pulse(75.0, -115.0)};
    cfg.probes = {{-95.0, 35.0, Component::Hz}};
    const RunResult ba = run(cfg);
    CHECK(max_rel_diff(ab.records[0].samples, ba.records[0].samples) < 1e-10);
}

TEST_CASE("symmetry-reduced run matches the full run with mirrored sources")
{
    const DielectricGrid g = patterned_grid(64, 10.0);
    for (Symmetry sx : {Symmetry::odd, Symmetry::even})
    {
        for (Symmetry sy : {Symmetry::odd, Symmetry::even})
        {
            const double px = sx == Symmetry::odd ? -1.0 : 1.0;
            const double py = sy == Symmetry::odd ? -1.0 : 1.0;
            SimConfig full;
            full.grid = &g;
            full.n_steps = 1500;
            full.snapshot_stride = 1000;
            full.snapshot_start = 1499;
            for (int mx : {1, -1})
            {
                for (int my : {1, -1})
                {
                    SourceSpec s = pulse(mx * 55.0, my * 35.0);
                    s.amplitude = (mx < 0 ? px : 1.0) * (my < 0 ? py : 1.0);
                    full.sources.push_back(s);
                }
            }
            full.probes = {{125.0, 85.0, Component::Hz}, {45.0, 175.0, Component::Ex}, {45.0, 175.0, Component::Ey}};
            SimConfig reduced = full;
            reduced.sources = {pulse(55.0, 35.0)};
            reduced.symmetry_x = sx;
            reduced.symmetry_y = sy;
            const RunResult a = run(full);
            const RunResult b = run(reduced);
            for (std::size_t p = 0; p < a.records.size(); ++p)
            {
                CHECK(max_rel_diff(a.records[p].samples, b.records[p].samples) < 1e-10);
            }
            REQUIRE(b.snapshots.size() == 1);
            const Snapshot &s = b.snapshots[0];
            CHECK(s.unfolded);
            CHECK(max_rel_diff(a.snapshots[0].hz, s.hz) < 1e-10);
            // Unfolded H_z obeys its parity across the mirror planes.
            double worst = 0.0;
            double peak = 0.0;
            for (int j = 0; j < s.ny; ++j)
            {
                for (int i = 0; i < s.nx; ++i)
                {
                    const double v = s.hz[j * s.nx + i];
                    const double mirrored = s.hz[j * s.nx + (s.nx - 1 - i)];
                    worst = std::max(worst, std::abs(v - px * mirrored));
                    peak = std::max(peak, std::abs(v));
                }
            }
            CHECK(worst <= 1e-14 * peak);
        }
    }
}

TEST_CASE("total_energy sums eps |E|^2 + |H|^2 over cells")
{
    const DielectricGrid g = patterned_grid(16, 100.0);
    Snapshot s;
    s.nx = 16;
    s.ny = 16;
    s.hz.assign(256, 0.0);
    s.ex.assign(256, 0.0);
    s.ey.assign(256, 0.0);
    CHECK(total_energy(s, g) == 0.0);
    s.hz.assign(256, 1.0);
    CHECK(total_energy(s, g) == doctest::Approx(128.0).epsilon(1e-15));

    std::mt19937 rng(7);
    std::normal_distribution<double> n01;
    long double ref = 0.0L;
    for (std::size_t k = 0; k < 256; ++k)
    {
        s.hz[k] = n01(rng);
        s.ex[k] = n01(rng);
        s.ey[k] = n01(rng);
        ref += 0.5L * (static_cast<long double>(g.eps[k]) * (s.ex[k] * s.ex[k] + s.ey[k] * s.ey[k]) +
                       s.hz[k] * s.hz[k]);
    }
    CHECK(total_energy(s, g) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
    s.nx = 8;
    CHECK_THROWS_AS(total_energy(s, g), ConfigError);
}

TEST_CASE("snapshot memory cap is enforced before stepping")
{
    const DielectricGrid g = geometry::uniform_grid(64, 64, 10.0, 1.0, 100.0);
    SimConfig cfg;
    cfg.grid = &g;
    cfg.n_steps = 100;
    cfg.snapshot_stride = 1;
    cfg.max_snapshot_bytes = 1 << 16;
    CHECK_THROWS_AS(run(cfg), ComputeError);
}
