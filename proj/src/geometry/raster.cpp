#include "phcav/error.hpp"
#include "phcav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phcav::geometry
{
namespace
{
// Fraction of the square cell [x0, x0+h] x [y0, y0+h] covered by the disk.
double coverage(double x0, double y0, double h, const Hole &hole, int sub)
{
    const double r2 = hole.r_nm * hole.r_nm;
    const double nearest_x = std::clamp(hole.x_nm, x0, x0 + h) - hole.x_nm;
    const double nearest_y = std::clamp(hole.y_nm, y0, y0 + h) - hole.y_nm;
    if (nearest_x * nearest_x + nearest_y * nearest_y >= r2)
    {
        return 0.0;
    }
    const double far_x = std::max(std::abs(x0 - hole.x_nm), std::abs(x0 + h - hole.x_nm));
    const double far_y = std::max(std::abs(y0 - hole.y_nm), std::abs(y0 + h - hole.y_nm));
    if (far_x * far_x + far_y * far_y <= r2)
    {
        return 1.0;
    }
    int inside = 0;
    const double step = h / sub;
    for (int a = 0; a < sub; ++a)
    {
        const double py = y0 + (a + 0.5) * step - hole.y_nm;
        for (int b = 0; b < sub; ++b)
        {
            const double px = x0 + (b + 0.5) * step - hole.x_nm;
            if (px * px + py * py < r2)
            {
                ++inside;
            }
        }
    }
    return static_cast<double>(inside) / (sub * sub);
}
} // namespace

DielectricGrid uniform_grid(int nx, int ny, double dx_nm, double eps, double a_nm)
{
    if (nx <= 0 || ny <= 0 || !(dx_nm > 0.0) || !(eps >= 1.0))
    {
        throw ConfigError("uniform_grid: invalid shape, pitch or permittivity");
    }
    DielectricGrid g;
    g.nx = nx;
    g.ny = ny;
    g.dx_nm = dx_nm;
    g.origin_x_nm = -0.5 * nx * dx_nm;
    g.origin_y_nm = -0.5 * ny * dx_nm;
    g.n_eff = std::sqrt(eps);
    g.a_nm = a_nm;
    g.eps.assign(static_cast<std::size_t>(nx) * ny, eps);
    return g;
}

DielectricGrid rasterize(const HoleList &holes, const LatticeSpec &spec, const RasterOptions &options)
{
    spec.validate();
    const double dx = options.dx_nm;
    if (!(dx > 0.0) || dx > spec.a_nm / 10.0 * (1.0 + 1e-12))
    {
        throw ConfigError("rasterize: dx must satisfy 0 < dx <= a/10");
    }
    if (options.subsamples < 1 || options.padding_nm < 0.0)
    {
        throw ConfigError("rasterize: subsamples >= 1 and padding >= 0 required");
    }

    const double half_w = 0.5 * holes.footprint_width_nm + options.padding_nm;
    const double half_h = 0.5 * holes.footprint_height_nm + options.padding_nm;
    const int nx = 2 * static_cast<int>(std::ceil(half_w / dx - 1e-9));
    const int ny = 2 * static_cast<int>(std::ceil(half_h / dx - 1e-9));
    const std::size_t bytes = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * sizeof(double);
    if (bytes > options.max_bytes)
    {
        std::ostringstream msg;
        msg << "rasterize: grid of " << nx << " x " << ny << " cells needs " << bytes / (1024.0 * 1024.0)
            << " MB, above the cap of " << options.max_bytes / (1024.0 * 1024.0) << " MB";
        throw ComputeError(msg.str());
    }

    const double n_eff =
        effective_index(spec.slab_thickness_nm, spec.n_slab, spec.n_clad, spec.wavelength_nm, spec.polarization);
    const double eps_slab = n_eff * n_eff;
    constexpr double eps_air = 1.0;

    DielectricGrid grid;
    grid.nx = nx;
    grid.ny = ny;
    grid.dx_nm = dx;
    grid.origin_x_nm = -0.5 * nx * dx;
    grid.origin_y_nm = -0.5 * ny * dx;
    grid.n_eff = n_eff;
    grid.a_nm = spec.a_nm;
    grid.spec_digest = spec.digest();

    std::vector<double> air(static_cast<std::size_t>(nx) * ny, 0.0);
    for (const Hole &hole : holes.holes)
    {
        const int i0 = std::max(0, static_cast<int>(std::floor((hole.x_nm - hole.r_nm - grid.origin_x_nm) / dx)));
        const int i1 = std::min(nx - 1, static_cast<int>(std::floor((hole.x_nm + hole.r_nm - grid.origin_x_nm) / dx)));
        const int j0 = std::max(0, static_cast<int>(std::floor((hole.y_nm - hole.r_nm - grid.origin_y_nm) / dx)));
        const int j1 = std::min(ny - 1, static_cast<int>(std::floor((hole.y_nm + hole.r_nm - grid.origin_y_nm) / dx)));
        for (int j = j0; j <= j1; ++j)
        {
            const double y0 = grid.origin_y_nm + j * dx;
            for (int i = i0; i <= i1; ++i)
            {
                const double x0 = grid.origin_x_nm + i * dx;
                double f = 0.0;
                if (options.smoothing == Smoothing::staircase)
                {
                    const double cx = x0 + 0.5 * dx - hole.x_nm;
                    const double cy = y0 + 0.5 * dx - hole.y_nm;
                    f = (cx * cx + cy * cy < hole.r_nm * hole.r_nm) ? 1.0 : 0.0;
                }
                else
                {
                    f = coverage(x0, y0, dx, hole, options.subsamples);
                }
                air[static_cast<std::size_t>(j) * nx + i] += f;
            }
        }
    }

    grid.eps.resize(air.size());
    for (std::size_t k = 0; k < air.size(); ++k)
    {
        const double f = std::min(1.0, air[k]);
        grid.eps[k] = eps_slab * (1.0 - f) + eps_air * f;
    }
    return grid;
}

double air_fill_fraction(const DielectricGrid &grid)
{
    const double eps_slab = grid.n_eff * grid.n_eff;
    double sum = 0.0;
    for (double e : grid.eps)
    {
        sum += (eps_slab - e) / (eps_slab - 1.0);
    }
    return sum / static_cast<double>(grid.eps.size());
}

} // namespace phcav::geometry
