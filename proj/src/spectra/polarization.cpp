#include "phcav/error.hpp"
#include "phcav/spectra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phcav::spectra
{

PolarizationFit polarization_fit(std::span<const double> angles_rad, std::span<const double> powers)
{
    const std::size_t n = angles_rad.size();
    if (powers.size() != n)
    {
        throw ConfigError("polarization_fit: angle and power columns differ in length");
    }
    std::vector<double> sorted(angles_rad.begin(), angles_rad.end());
    std::sort(sorted.begin(), sorted.end());
    const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
    if (distinct < 5 || sorted[static_cast<std::size_t>(distinct) - 1] - sorted.front() < std::numbers::pi - 1e-9)
    {
        throw ConfigError("polarization_fit: need at least 5 distinct angles spanning at least pi");
    }

    // P = c0 + c1 cos 2t + c2 sin 2t is linear in c.
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
    {
        const auto r = static_cast<Eigen::Index>(k);
        a(r, 0) = 1.0;
        a(r, 1) = std::cos(2.0 * angles_rad[k]);
        a(r, 2) = std::sin(2.0 * angles_rad[k]);
        b(r) = powers[k];
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
    PolarizationFit fit;
    fit.residual = std::sqrt((a * c - b).squaredNorm() / static_cast<double>(n));
    const double swing = std::hypot(c(1), c(2));
    fit.p_max = c(0) + swing;
    fit.p_min = c(0) - swing;
    if (swing <= 1e-12 * std::abs(c(0)) || swing == 0.0)
    {
        fit.theta_undetermined = true;
        fit.theta0_rad = 0.0;
        fit.p_max = fit.p_min = c(0);
    }
    else
    {
        double t = 0.5 * std::atan2(c(2), c(1));
        if (t < 0.0)
        {
            t += std::numbers::pi;
        }
        fit.theta0_rad = t;
    }
    if (fit.p_min < 0.0)
    {
        fit.p_min = 0.0;
        fit.p_min_clamped = true;
    }
    fit.extinction_ratio = fit.p_min > 0.0 ? fit.p_max / fit.p_min : INFINITY;
    return fit;
}

} // namespace phcav::spectra
