#include "phcav/error.hpp"
#include "phcav/spectra.hpp"

#include <cmath>
#include <numbers>

namespace phcav::spectra
{

double beam_sigma_from_area_nm(double area_um2)
{
    if (!(area_um2 > 0.0))
    {
        throw ConfigError("beam area must be positive");
    }
    return std::sqrt(area_um2 / (2.0 * std::numbers::pi)) * 1e3;
}

std::vector<double> pump_overlap_scan(const modes::EnvelopeFit &envelope, double beam_sigma_nm,
                                      std::span<const PumpPosition> positions)
{
    if (!(envelope.sigma_x_nm > 0.0) || !(envelope.sigma_y_nm > 0.0) || !(beam_sigma_nm >= 0.0))
    {
        throw ConfigError("pump_overlap_scan: envelope widths must be positive and the beam width non-negative");
    }
    // Product of two Gaussians integrates to a Gaussian in the offset whose
    // variance is the sum of the two.
    const double vx = envelope.sigma_x_nm * envelope.sigma_x_nm + beam_sigma_nm * beam_sigma_nm;
    const double vy = envelope.sigma_y_nm * envelope.sigma_y_nm + beam_sigma_nm * beam_sigma_nm;
    std::vector<double> out;
    out.reserve(positions.size());
    for (const auto &p : positions)
    {
        const double dx = p.x_nm - envelope.center_x_nm;
        const double dy = p.y_nm - envelope.center_y_nm;
        out.push_back(std::exp(-0.5 * (dx * dx / vx + dy * dy / vy)));
    }
    return out;
}

} // namespace phcav::spectra
