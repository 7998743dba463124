#include "phcav/error.hpp"
#include "phcav/modes.hpp"

#include <cmath>

namespace phcav::modes
{

std::vector<double> electric_energy_density(const fdtd::Snapshot &snapshot, const geometry::DielectricGrid &grid)
{
    const std::size_t n = static_cast<std::size_t>(grid.nx) * grid.ny;
    if (snapshot.nx != grid.nx || snapshot.ny != grid.ny || snapshot.ex.size() != n || snapshot.ey.size() != n ||
        grid.eps.size() != n)
    {
        throw ConfigError("mode analysis: snapshot and grid shapes differ");
    }
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        u[k] = grid.eps[k] * (snapshot.ex[k] * snapshot.ex[k] + snapshot.ey[k] * snapshot.ey[k]);
    }
    return u;
}

std::size_t cycle_max_snapshot(const std::vector<fdtd::Snapshot> &snapshots, const geometry::DielectricGrid &grid)
{
    if (snapshots.empty())
    {
        throw ConfigError("cycle_max_snapshot: no snapshots");
    }
    std::size_t best = 0;
    double best_w = -1.0;
    for (std::size_t s = 0; s < snapshots.size(); ++s)
    {
        double w = 0.0;
        for (double v : electric_energy_density(snapshots[s], grid))
        {
            w += v;
        }
        if (w > best_w)
        {
            best_w = w;
            best = s;
        }
    }
    return best;
}

ModeVolumeResult mode_volume(const fdtd::Snapshot &snapshot, const geometry::DielectricGrid &grid, double freq,
                             const ModeVolumeOptions &options)
{
    if (!(freq > 0.0))
    {
        throw ConfigError("mode_volume: frequency must be positive");
    }
    const auto u = electric_energy_density(snapshot, grid);
    double sum = 0.0;
    double peak = 0.0;
    std::size_t at = 0;
    for (std::size_t k = 0; k < u.size(); ++k)
    {
        sum += u[k];
        if (u[k] > peak)
        {
            peak = u[k];
            at = k;
        }
    }
    if (!(peak > 0.0))
    {
        throw ComputeError("mode_volume: electric field is identically zero");
    }
    ModeVolumeResult r;
    const int pi = static_cast<int>(at % static_cast<std::size_t>(grid.nx));
    const int pj = static_cast<int>(at / static_cast<std::size_t>(grid.nx));
    r.peak_x_nm = grid.cell_x_nm(pi);
    r.peak_y_nm = grid.cell_y_nm(pj);
    r.peak_density = peak;
    r.valid = pi > 0 && pj > 0 && pi < grid.nx - 1 && pj < grid.ny - 1;

    r.area_nm2 = sum / peak * grid.dx_nm * grid.dx_nm;
    r.area_a2 = r.area_nm2 / (grid.a_nm * grid.a_nm);
    r.index = options.index > 0.0 ? options.index : grid.n_eff;
    r.wavelength_nm = grid.a_nm / freq;
    const double half = 0.5 * r.wavelength_nm;
    r.v_eff_air_2d = r.area_nm2 / (half * half);
    r.v_eff_material_2d = r.v_eff_air_2d * r.index * r.index;
    if (options.effective_height_nm)
    {
        if (!(*options.effective_height_nm > 0.0))
        {
            throw ConfigError("mode_volume: effective height must be positive");
        }
        r.v_eff_air_3d = r.area_nm2 * *options.effective_height_nm / (half * half * half);
        r.v_eff_material_3d = *r.v_eff_air_3d * r.index * r.index * r.index;
    }
    return r;
}

} // namespace phcav::modes
