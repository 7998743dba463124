#include "phcav/error.hpp"
#include "phcav/modes.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace phcav::modes
{
namespace
{
// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex planner_mutex;

std::vector<double> tukey(int n, double fraction)
{
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    if (fraction <= 0.0)
    {
        return w;
    }
    const double edge = 0.5 * fraction;
    for (int k = 0; k < n; ++k)
    {
        const double x = (k + 0.5) / n;
        const double d = std::min(x, 1.0 - x);
        if (d < edge)
        {
            w[static_cast<std::size_t>(k)] = 0.5 * (1.0 - std::cos(std::numbers::pi * d / edge));
        }
    }
    return w;
}

std::vector<double> wavenumbers(int n, double dx_a)
{
    std::vector<double> k(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
    {
        const int m = i <= n / 2 ? i : i - n;
        k[static_cast<std::size_t>(i)] = m / (n * dx_a);
    }
    return k;
}
} // namespace

FourierMap fourier_power(std::span<const double> field, int nx, int ny, double dx_a, double taper_fraction)
{
    if (nx < 1 || ny < 1 || field.size() != static_cast<std::size_t>(nx) * ny)
    {
        throw ConfigError("fourier_power: field size does not match nx * ny");
    }
    if (taper_fraction < 0.0 || taper_fraction > 1.0)
    {
        throw ConfigError("fourier_power: taper fraction must lie in [0, 1]");
    }
    const auto wx = tukey(nx, taper_fraction);
    const auto wy = tukey(ny, taper_fraction);
    const std::size_t n = field.size();
    fftw_complex *buf = fftw_alloc_complex(n);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan = fftw_plan_dft_2d(ny, nx, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (int j = 0; j < ny; ++j)
    {
        for (int i = 0; i < nx; ++i)
        {
            const std::size_t k = static_cast<std::size_t>(j) * nx + i;
            buf[k][0] = field[k] * wx[static_cast<std::size_t>(i)] * wy[static_cast<std::size_t>(j)];
            buf[k][1] = 0.0;
        }
    }
    fftw_execute(plan);
    FourierMap map;
    map.nx = nx;
    map.ny = ny;
    map.kx = wavenumbers(nx, dx_a);
    map.ky = wavenumbers(ny, dx_a);
    map.power.resize(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        map.power[k] = buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1];
    }
    {
        std::lock_guard lock(planner_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return map;
}

LightConeResult light_cone_fraction(const fdtd::Snapshot &snapshot, const geometry::DielectricGrid &grid, double freq,
                                    double n_clad, const LightConeOptions &options)
{
    if (snapshot.nx != grid.nx || snapshot.ny != grid.ny)
    {
        throw ConfigError("light_cone_fraction: snapshot and grid shapes differ");
    }
    if (!(freq > 0.0) || !(n_clad >= 1.0))
    {
        throw ConfigError("light_cone_fraction: need freq > 0 and n_clad >= 1");
    }
    if (snapshot.band_hi > snapshot.band_lo && (freq < snapshot.band_lo || freq > snapshot.band_hi))
    {
        std::ostringstream msg;
        msg << "light_cone_fraction: freq " << freq << " lies outside the band [" << snapshot.band_lo << ", "
            << snapshot.band_hi << "] the snapshot was excited in";
        throw ConfigError(msg.str());
    }
    const double dx_a = grid.dx_nm / grid.a_nm;
    const double radius = freq * n_clad;
    if (radius >= 0.5 / dx_a)
    {
        throw ConfigError("light_cone_fraction: light-cone radius exceeds the grid Nyquist wavenumber");
    }
    const auto &field = snapshot.component(options.component);
    if (field.size() != static_cast<std::size_t>(grid.nx) * grid.ny)
    {
        throw ConfigError("light_cone_fraction: snapshot component is missing");
    }

    LightConeResult r;
    r.map = fourier_power(field, grid.nx, grid.ny, dx_a, options.taper_fraction);
    r.map.light_cone_radius = radius;
    double inside = 0.0;
    for (int j = 0; j < grid.ny; ++j)
    {
        const double ky = r.map.ky[static_cast<std::size_t>(j)];
        for (int i = 0; i < grid.nx; ++i)
        {
            const double kx = r.map.kx[static_cast<std::size_t>(i)];
            const double p = r.map.power[static_cast<std::size_t>(j) * grid.nx + i];
            r.total_power += p;
            if (kx * kx + ky * ky < radius * radius)
            {
                inside += p;
            }
        }
    }
    if (!(r.total_power > 0.0))
    {
        throw ComputeError("light_cone_fraction: field component is identically zero");
    }
    r.fraction = inside / r.total_power;
    r.dc_power = r.map.power[0];
    r.dc_fraction = r.dc_power / r.total_power;

    double sum = 0.0, sum2 = 0.0;
    for (double v : field)
    {
        sum += v;
        sum2 += v * v;
    }
    r.dc_power_untapered = sum * sum;
    r.dc_fraction_untapered = sum2 > 0.0 ? sum * sum / (static_cast<double>(field.size()) * sum2) : 0.0;
    return r;
}

} // namespace phcav::modes
