#include "../common/least_squares.hpp"
#include "phcav/error.hpp"
#include "phcav/modes.hpp"

#include <algorithm>
#include <cmath>

namespace phcav::modes
{
namespace
{
std::vector<double> running_max(const std::vector<double> &v, int half_window)
{
    const int n = static_cast<int>(v.size());
    std::vector<double> out(v.size());
    for (int i = 0; i < n; ++i)
    {
        double m = v[static_cast<std::size_t>(i)];
        for (int k = std::max(0, i - half_window); k <= std::min(n - 1, i + half_window); ++k)
        {
            m = std::max(m, v[static_cast<std::size_t>(k)]);
        }
        out[static_cast<std::size_t>(i)] = m;
    }
    return out;
}

struct AxisFit
{
    double amplitude;
    double center;
    double sigma;
    double sse;
    double sst;
};

// Gaussian through the same running maximum as the data, sampled at `x`.
AxisFit fit_axis(const std::vector<double> &x, const std::vector<double> &env, int half_window, double pitch)
{
    const auto n = static_cast<int>(env.size());
    const auto peak_it = std::max_element(env.begin(), env.end());
    const double peak = *peak_it;
    int first = 0, last = n - 1;
    while (first < n && env[static_cast<std::size_t>(first)] < 0.5 * peak)
    {
        ++first;
    }
    while (last > 0 && env[static_cast<std::size_t>(last)] < 0.5 * peak)
    {
        --last;
    }
    const double center0 = 0.5 * (x[static_cast<std::size_t>(first)] + x[static_cast<std::size_t>(last)]);
    const double hwhm = std::max(pitch, 0.5 * (x[static_cast<std::size_t>(last)] - x[static_cast<std::size_t>(first)]) -
                                            half_window * pitch);
    const double sigma0 = hwhm / std::sqrt(2.0 * std::log(2.0));

    std::vector<double> model(env.size());
    auto evaluate = [&](const Eigen::VectorXd &p, Eigen::VectorXd &res) {
        const double sigma = std::exp(p(2));
        for (std::size_t i = 0; i < env.size(); ++i)
        {
            const double d = (x[i] - p(1)) / sigma;
            model[i] = p(0) * std::exp(-0.5 * d * d);
        }
        const auto smoothed = running_max(model, half_window);
        for (std::size_t i = 0; i < env.size(); ++i)
        {
            res(static_cast<Eigen::Index>(i)) = (smoothed[i] - env[i]) / peak;
        }
    };
    Eigen::VectorXd start(3);
    start << peak, center0, std::log(sigma0);
    const auto lsq = detail::levenberg_marquardt(evaluate, start, n, 4000);

    AxisFit fit{lsq.params(0), lsq.params(1), std::exp(lsq.params(2)), lsq.sse * peak * peak, 0.0};
    double mean = 0.0;
    for (double v : env)
    {
        mean += v;
    }
    mean /= n;
    for (double v : env)
    {
        fit.sst += (v - mean) * (v - mean);
    }
    return fit;
}
} // namespace

EnvelopeFit envelope_gaussian_fit(std::span<const double> density, const geometry::DielectricGrid &grid)
{
    const auto nx = static_cast<std::size_t>(grid.nx);
    const auto ny = static_cast<std::size_t>(grid.ny);
    if (density.size() != nx * ny || nx < 3 || ny < 3)
    {
        throw ConfigError("envelope_gaussian_fit: density shape does not match the grid");
    }
    std::vector<double> px(nx, 0.0), py(ny, 0.0);
    for (std::size_t j = 0; j < ny; ++j)
    {
        for (std::size_t i = 0; i < nx; ++i)
        {
            const double v = density[j * nx + i];
            if (!(v >= 0.0))
            {
                throw ConfigError("envelope_gaussian_fit: density must be non-negative");
            }
            px[i] = std::max(px[i], v);
            py[j] = std::max(py[j], v);
        }
    }
    if (!(*std::max_element(px.begin(), px.end()) > 0.0))
    {
        throw ComputeError("envelope_gaussian_fit: density is identically zero");
    }
    const int half_window = static_cast<int>(std::floor(grid.a_nm / (2.0 * grid.dx_nm)));
    const auto env_x = running_max(px, half_window);
    const auto env_y = running_max(py, half_window);
    std::vector<double> xs(nx), ys(ny);
    for (std::size_t i = 0; i < nx; ++i)
    {
        xs[i] = grid.cell_x_nm(static_cast<int>(i));
    }
    for (std::size_t j = 0; j < ny; ++j)
    {
        ys[j] = grid.cell_y_nm(static_cast<int>(j));
    }
    const auto fx = fit_axis(xs, env_x, half_window, grid.dx_nm);
    const auto fy = fit_axis(ys, env_y, half_window, grid.dx_nm);

    EnvelopeFit fit;
    fit.sigma_x_nm = fx.sigma;
    fit.sigma_y_nm = fy.sigma;
    fit.center_x_nm = fx.center;
    fit.center_y_nm = fy.center;
    fit.amplitude = 0.5 * (fx.amplitude + fy.amplitude);
    const double sst = fx.sst + fy.sst;
    fit.r2 = sst > 0.0 ? std::clamp(1.0 - (fx.sse + fy.sse) / sst, 0.0, 1.0) : 0.0;
    fit.poor_fit = fit.r2 < 0.5;
    fit.window_cells = half_window;
    return fit;
}

} // namespace phcav::modes
