#include "phcav/error.hpp"
#include "phcav/spectra.hpp"

#include <cmath>
#include <sstream>

namespace phcav::spectra
{

void LLData::validate() const
{
    if (line_power.size() != pump_uW.size() || (!background_power.empty() && background_power.size() != pump_uW.size()))
    {
        throw ConfigError("L-L data: columns differ in length");
    }
    for (std::size_t k = 1; k < pump_uW.size(); ++k)
    {
        if (!(pump_uW[k] > pump_uW[k - 1]))
        {
            throw ConfigError("L-L data: pump powers must be strictly ascending");
        }
    }
}

namespace
{
// Running sums for O(1) least-squares lines over any index range.
struct Sums
{
    std::vector<double> x, y, xx, xy, yy;

    Sums(std::span<const double> px, std::span<const double> py)
        : x(px.size() + 1), y(px.size() + 1), xx(px.size() + 1), xy(px.size() + 1), yy(px.size() + 1)
    {
        for (std::size_t k = 0; k < px.size(); ++k)
        {
            x[k + 1] = x[k] + px[k];
            y[k + 1] = y[k] + py[k];
            xx[k + 1] = xx[k] + px[k] * px[k];
            xy[k + 1] = xy[k] + px[k] * py[k];
            yy[k + 1] = yy[k] + py[k] * py[k];
        }
    }

    // Fits y = slope x + intercept on [a, b) and returns its squared residual.
    double line(std::size_t a, std::size_t b, LineFit &fit) const
    {
        const double n = static_cast<double>(b - a);
        const double sx = x[b] - x[a], sy = y[b] - y[a];
        const double sxx = xx[b] - xx[a] - sx * sx / n;
        const double sxy = xy[b] - xy[a] - sx * sy / n;
        const double syy = yy[b] - yy[a] - sy * sy / n;
        fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
        fit.intercept = (sy - fit.slope * sx) / n;
        return std::max(0.0, syy - fit.slope * sxy);
    }
};

// Residual from the raw data; the running-sum form above only ranks splits.
double sse(std::span<const double> px, std::span<const double> py, std::size_t a, std::size_t b, const LineFit &f)
{
    double s = 0.0;
    for (std::size_t k = a; k < b; ++k)
    {
        const double r = py[k] - (f.slope * px[k] + f.intercept);
        s += r * r;
    }
    return s;
}

LineFit refit(std::span<const double> px, std::span<const double> py, std::size_t a, std::size_t b)
{
    double mx = 0.0, my = 0.0;
    for (std::size_t k = a; k < b; ++k)
    {
        mx += px[k];
        my += py[k];
    }
    mx /= static_cast<double>(b - a);
    my /= static_cast<double>(b - a);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = a; k < b; ++k)
    {
        sxx += (px[k] - mx) * (px[k] - mx);
        sxy += (px[k] - mx) * (py[k] - my);
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    return f;
}
} // namespace

ThresholdFit fit_threshold(std::span<const double> pump_uW, std::span<const double> power, ThresholdSignal which)
{
    const std::size_t n = pump_uW.size();
    if (power.size() != n)
    {
        throw ConfigError("fit_threshold: pump and power columns differ in length");
    }
    constexpr std::size_t min_side = 4;
    if (n < 2 * min_side)
    {
        throw ConfigError("fit_threshold: need at least 8 points (4 on each side of the knee)");
    }
    for (std::size_t k = 1; k < n; ++k)
    {
        if (!(pump_uW[k] > pump_uW[k - 1]))
        {
            throw ConfigError("fit_threshold: pump powers must be strictly ascending");
        }
    }

    const Sums sums(pump_uW, power);
    std::size_t best_split = 0;
    double best = INFINITY;
    for (std::size_t k = min_side; k + min_side <= n; ++k)
    {
        LineFit a, b;
        const double total = sums.line(0, k, a) + sums.line(k, n, b);
        if (total < best)
        {
            best = total;
            best_split = k;
        }
    }

    ThresholdFit fit;
    fit.below = refit(pump_uW, power, 0, best_split);
    fit.above = refit(pump_uW, power, best_split, n);
    fit.below_range = {0, best_split};
    fit.above_range = {best_split, n};
    fit.sse = sse(pump_uW, power, 0, best_split, fit.below) + sse(pump_uW, power, best_split, n, fit.above);
    const LineFit single = refit(pump_uW, power, 0, n);
    fit.sse_single_line = sse(pump_uW, power, 0, n, single);

    double mean = 0.0;
    for (double v : power)
    {
        mean += v;
    }
    mean /= static_cast<double>(n);
    double sst = 0.0;
    for (double v : power)
    {
        sst += (v - mean) * (v - mean);
    }
    if (fit.sse_single_line <= 1e-20 * sst || fit.sse >= 0.95 * fit.sse_single_line)
    {
        throw ComputeError("fit_threshold: no threshold detected (two lines do not improve on one by more than 5%)");
    }
    const double dslope = fit.above.slope - fit.below.slope;
    if (which == ThresholdSignal::line && !(dslope > 0.0))
    {
        throw ComputeError("fit_threshold: no threshold detected (slope does not increase across the knee)");
    }
    if (dslope == 0.0)
    {
        throw ComputeError("fit_threshold: no threshold detected (parallel segments)");
    }
    fit.p_threshold_uW = (fit.below.intercept - fit.above.intercept) / dslope;
    if (!(fit.p_threshold_uW >= pump_uW.front() && fit.p_threshold_uW <= pump_uW.back()))
    {
        std::ostringstream msg;
        msg << "fit_threshold: no threshold detected (segments cross at " << fit.p_threshold_uW
            << " uW, outside the measured pump range)";
        throw ComputeError(msg.str());
    }
    return fit;
}

ThresholdFit fit_threshold(const LLData &data, ThresholdSignal which)
{
    data.validate();
    if (which == ThresholdSignal::background)
    {
        if (data.background_power.empty())
        {
            throw ConfigError("fit_threshold: no background column");
        }
        return fit_threshold(data.pump_uW, data.background_power, which);
    }
    return fit_threshold(data.pump_uW, data.line_power, which);
}

} // namespace phcav::spectra
