#include "phcav/error.hpp"
#include "phcav/geometry.hpp"

#include <cmath>
#include <numbers>

namespace phcav::geometry
{

// Symmetric slab, fundamental even mode. With u = kappa d/2 and V = k0 d/2 sqrt(ns^2 - nc^2)
// the dispersion relation is u tan u = rho sqrt(V^2 - u^2), rho = 1 (TE) or ns^2/nc^2 (TM).
// The left side minus the right increases monotonically on (0, min(V, pi/2)), so bisection
// on u always brackets the single fundamental root.
double effective_index(double d_nm, double n_slab, double n_clad, double wavelength_nm, Polarization pol)
{
    if (!(n_slab > n_clad) || !(n_clad > 0.0) || !(d_nm > 0.0) || !(wavelength_nm > 0.0))
    {
        throw ConfigError("effective_index: need n_slab > n_clad > 0 and positive d, lambda");
    }
    const double k0 = 2.0 * std::numbers::pi / wavelength_nm;
    const double half = 0.5 * k0 * d_nm;
    const double na2 = n_slab * n_slab - n_clad * n_clad;
    const double v = half * std::sqrt(na2);
    const double rho = pol == Polarization::TE ? 1.0 : (n_slab * n_slab) / (n_clad * n_clad);

    auto residual = [&](double u) {
        return u * std::sin(u) - rho * std::sqrt(std::max(0.0, v * v - u * u)) * std::cos(u);
    };

    double lo = 0.0;
    double hi = std::min(v, 0.5 * std::numbers::pi);
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) < 0.0)
        {
            lo = mid;
        }
        else
        {
            hi = mid;
        }
    }
    const double u = 0.5 * (lo + hi);
    const double kappa = u / half * k0; // kappa / k0 * k0
    const double n2 = n_slab * n_slab - (kappa / k0) * (kappa / k0);
    return std::sqrt(n2);
}

} // namespace phcav::geometry
