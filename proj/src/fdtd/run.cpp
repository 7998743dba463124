#include "phcav/error.hpp"
#include "phcav/fdtd.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <exception>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

namespace phcav::fdtd
{

double SourceSpec::sigma_t() const
{
    return 1.0 / (2.0 * std::numbers::pi * bandwidth);
}

double SourceSpec::peak_time(double dt) const
{
    return t0_steps >= 0.0 ? t0_steps * dt : 4.0 / bandwidth;
}

double SourceSpec::window_end(double dt) const
{
    return peak_time(dt) + 4.0 / bandwidth;
}

double SourceSpec::value(double t, double dt) const
{
    const double t0 = peak_time(dt);
    const double tau = t - t0;
    if (std::abs(tau) > 4.0 / bandwidth)
    {
        return 0.0;
    }
    const double s = sigma_t();
    return amplitude * std::exp(-0.5 * tau * tau / (s * s)) * std::sin(2.0 * std::numbers::pi * center_freq * tau);
}

void SimConfig::validate() const
{
    if (grid == nullptr)
    {
        throw ConfigError("fdtd: no dielectric grid");
    }
    if (n_steps <= 0)
    {
        throw ConfigError("fdtd: n_steps must be positive");
    }
    if (!allow_unstable && !(courant > 0.0 && courant <= 1.0 / std::numbers::sqrt2))
    {
        std::ostringstream msg;
        msg << "fdtd: courant = " << courant << " violates the 2D stability bound 1/sqrt(2)";
        throw ConfigError(msg.str());
    }
    if (threads < 1)
    {
        throw ConfigError("fdtd: threads must be >= 1");
    }
    for (const auto &s : sources)
    {
        if (!(s.bandwidth > 0.0) || !(s.center_freq > 0.0))
        {
            throw ConfigError("fdtd: source bandwidth and center frequency must be positive");
        }
    }
    if (snapshot_stride < 0 || snapshot_start < 0 || energy_stride < 0)
    {
        throw ConfigError("fdtd: strides must be non-negative");
    }
}

namespace
{
struct Driver
{
    const SimConfig &cfg;
    Solver &solver;
    RunResult &out;
    std::vector<double> pending_hz;
    bool snapshot_pending = false;
    double band_lo = 0.0;
    double band_hi = 0.0;
    long failed_step = -1;
    std::string failure;

    bool snapshot_due(long s) const
    {
        if (cfg.snapshot_stride <= 0 || s < cfg.snapshot_start || s >= cfg.n_steps)
        {
            return false;
        }
        return (s - cfg.snapshot_start) % cfg.snapshot_stride == 0;
    }

    // After the H phase of step n: H is at (n + 1/2) dt, E still at n dt.
    void after_h()
    {
        const long n = solver.steps();
        if (snapshot_pending)
        {
            Snapshot s = solver.snapshot(&pending_hz);
            s.band_lo = band_lo;
            s.band_hi = band_hi;
            out.snapshots.push_back(std::move(s));
            snapshot_pending = false;
        }
        const double t = (n + 0.5) * solver.dt();
        for (const auto &src : cfg.sources)
        {
            if (src.component == Component::Hz)
            {
                solver.add_source(Component::Hz, src.x_nm, src.y_nm, src.value(t, solver.dt()));
            }
        }
        solver.begin_e_phase();
    }

    // After the E phase of step n: E is at (n + 1) dt.
    bool after_e()
    {
        const long n = solver.steps();
        const double t = (n + 1) * solver.dt();
        for (const auto &src : cfg.sources)
        {
            if (src.component != Component::Hz)
            {
                solver.add_source(src.component, src.x_nm, src.y_nm, src.value(t, solver.dt()));
            }
        }
        solver.advance_clock();
        const long done = solver.steps();
        bool ok = true;
        for (std::size_t p = 0; p < cfg.probes.size(); ++p)
        {
            const auto &probe = cfg.probes[p];
            const double v = solver.probe(probe.component, probe.x_nm, probe.y_nm);
            ok = ok && std::isfinite(v) && std::abs(v) < 1e150;
            out.records[p].samples.push_back(v);
        }
        if (cfg.energy_stride > 0 && done % cfg.energy_stride == 0)
        {
            const double w = solver.energy();
            ok = ok && std::isfinite(w);
            out.energy.push_back({done, (done - 0.5) * solver.dt(), w});
        }
        if (done % 256 == 0)
        {
            ok = ok && solver.finite();
        }
        if (!ok)
        {
            failed_step = done;
            std::ostringstream msg;
            msg << "fdtd: fields diverged at step " << done;
            failure = msg.str();
            return false;
        }
        if (snapshot_due(done))
        {
            pending_hz = solver.hz_reduced();
            snapshot_pending = true;
        }
        out.steps_done = done;
        return true;
    }
};
} // namespace

RunResult run(const SimConfig &config)
{
    config.validate();
    SolverOptions opt;
    opt.courant = config.courant;
    opt.boundary = config.boundary;
    opt.pml = config.pml;
    opt.symmetry_x = config.symmetry_x;
    opt.symmetry_y = config.symmetry_y;
    opt.allow_unstable = config.allow_unstable;
    Solver solver(*config.grid, opt);

    RunResult result;
    result.dt = solver.dt();

    long n_snap = 0;
    if (config.snapshot_stride > 0 && config.snapshot_start < config.n_steps)
    {
        n_snap = (config.n_steps - 1 - config.snapshot_start) / config.snapshot_stride + 1;
    }
    const std::size_t cells = static_cast<std::size_t>(config.grid->nx) * config.grid->ny;
    const std::size_t snap_bytes = static_cast<std::size_t>(n_snap) * 3 * cells * sizeof(double);
    const std::size_t field_bytes = 10 * cells * sizeof(double);
    if (snap_bytes + field_bytes > config.max_snapshot_bytes)
    {
        std::ostringstream msg;
        msg << "fdtd: " << n_snap << " snapshots of " << config.grid->nx << " x " << config.grid->ny
            << " cells plus solver fields need " << (snap_bytes + field_bytes) / (1024.0 * 1024.0)
            << " MB, above the cap of " << config.max_snapshot_bytes / (1024.0 * 1024.0) << " MB";
        throw ComputeError(msg.str());
    }

    double window_end = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    for (std::size_t k = 0; k < config.sources.size(); ++k)
    {
        const auto &s = config.sources[k];
        window_end = std::max(window_end, s.window_end(solver.dt()));
        const double lo = std::max(0.0, s.center_freq - 3.0 * s.bandwidth);
        const double hi = s.center_freq + 3.0 * s.bandwidth;
        band_lo = k == 0 ? lo : std::min(band_lo, lo);
        band_hi = k == 0 ? hi : std::max(band_hi, hi);
    }
    const long start_step = static_cast<long>(std::ceil(window_end / solver.dt()));

    result.records.resize(config.probes.size());
    for (std::size_t p = 0; p < config.probes.size(); ++p)
    {
        auto &rec = result.records[p];
        rec.x_nm = config.probes[p].x_nm;
        rec.y_nm = config.probes[p].y_nm;
        rec.component = config.probes[p].component;
        rec.dt = solver.dt();
        rec.start_step = start_step;
        rec.time_offset = rec.component == Component::Hz ? 0.5 : 1.0;
        rec.samples.reserve(static_cast<std::size_t>(config.n_steps));
        // Fail early on probes outside the domain.
        (void)solver.probe(rec.component, rec.x_nm, rec.y_nm);
    }
    for (const auto &s : config.sources)
    {
        solver.add_source(s.component, s.x_nm, s.y_nm, 0.0);
    }

    Driver driver{config, solver, result, {}, false, band_lo, band_hi, -1, {}};
    if (driver.snapshot_due(0))
    {
        driver.pending_hz = solver.hz_reduced();
        driver.snapshot_pending = true;
    }

    const int bands = std::clamp(config.threads, 1, solver.ny());
    if (bands == 1)
    {
        for (long n = 0; n < config.n_steps; ++n)
        {
            solver.update_h(0, solver.ny());
            driver.after_h();
            solver.update_e(0, solver.ny());
            if (!driver.after_e())
            {
                throw DivergenceError(driver.failed_step, driver.failure);
            }
        }
        return result;
    }

    // Row bands share one barrier; its completion step runs the serial work
    // (sources, probes, snapshots) between the H and E phases.
    std::vector<int> edges(static_cast<std::size_t>(bands) + 1);
    for (int b = 0; b <= bands; ++b)
    {
        edges[static_cast<std::size_t>(b)] = static_cast<int>(static_cast<long>(solver.ny()) * b / bands);
    }
    std::atomic<bool> stop{false};
    bool h_phase_done = false;
    std::exception_ptr error;
    auto completion = [&]() noexcept {
        try
        {
            if (!h_phase_done)
            {
                driver.after_h();
                h_phase_done = true;
            }
            else
            {
                h_phase_done = false;
                if (!driver.after_e() || solver.steps() >= config.n_steps)
                {
                    stop.store(true, std::memory_order_relaxed);
                }
            }
        }
        catch (...)
        {
            error = std::current_exception();
            stop.store(true, std::memory_order_relaxed);
        }
    };
    std::barrier sync(bands, completion);
    auto worker = [&](int b) {
        const int j0 = edges[static_cast<std::size_t>(b)];
        const int j1 = edges[static_cast<std::size_t>(b) + 1];
        while (true)
        {
            solver.update_h(j0, j1);
            sync.arrive_and_wait();
            solver.update_e(j0, j1);
            sync.arrive_and_wait();
            if (stop.load(std::memory_order_relaxed))
            {
                break;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(bands));
        for (int b = 0; b < bands; ++b)
        {
            pool.emplace_back(worker, b);
        }
    }
    if (error)
    {
        std::rethrow_exception(error);
    }
    if (driver.failed_step >= 0)
    {
        throw DivergenceError(driver.failed_step, driver.failure);
    }
    return result;
}

} // namespace phcav::fdtd
