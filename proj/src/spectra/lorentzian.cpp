#include "../common/least_squares.hpp"
#include "phcav/error.hpp"
#include "phcav/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phcav::spectra
{

void Spectrum::validate() const
{
    if (wavelength_nm.size() != power.size())
    {
        throw ConfigError("spectrum: wavelength and power columns differ in length");
    }
    for (std::size_t k = 1; k < wavelength_nm.size(); ++k)
    {
        if (!(wavelength_nm[k] > wavelength_nm[k - 1]))
        {
            throw ConfigError("spectrum: wavelengths must be strictly ascending");
        }
    }
    for (double p : power)
    {
        if (!(p >= 0.0))
        {
            throw ConfigError("spectrum: power must be non-negative");
        }
    }
    if (resolution_nm < 0.0)
    {
        throw ConfigError("spectrum: instrument resolution must be non-negative");
    }
}

namespace
{
struct Window
{
    std::vector<double> x;
    std::vector<double> y;
};

// Distance from the peak to the half-maximum crossing on one side (linear
// interpolation), or a negative value when the data never drop that low.
double half_width(const Window &w, std::size_t peak, double level, int dir)
{
    std::size_t k = peak;
    while (true)
    {
        const std::size_t next = dir > 0 ? k + 1 : k - 1;
        if ((dir > 0 && next >= w.x.size()) || (dir < 0 && k == 0))
        {
            return -1.0;
        }
        if (w.y[next] <= level)
        {
            const double f = (w.y[k] - level) / (w.y[k] - w.y[next]);
            return std::abs(w.x[k] + f * (w.x[next] - w.x[k]) - w.x[peak]);
        }
        k = next;
    }
}

struct Params
{
    double offset, amplitude, center, fwhm, sse;
    bool converged;
};

Params fit_window(const Window &w, double offset0, double amp0, double center0, double fwhm0, int max_eval)
{
    const double scale = std::max(amp0, 1e-300);
    auto residual = [&](const Eigen::VectorXd &p, Eigen::VectorXd &r) {
        const double fwhm = std::exp(p(3));
        for (std::size_t k = 0; k < w.x.size(); ++k)
        {
            const double u = 2.0 * (w.x[k] - p(2)) / fwhm;
            r(static_cast<Eigen::Index>(k)) = (p(0) + p(1) / (1.0 + u * u) - w.y[k]) / scale;
        }
    };
    Eigen::VectorXd start(4);
    start << offset0, amp0, center0, std::log(fwhm0);
    const auto lsq = detail::levenberg_marquardt(residual, start, static_cast<int>(w.x.size()), max_eval);
    return {lsq.params(0), lsq.params(1), lsq.params(2), std::exp(lsq.params(3)), lsq.sse * scale * scale,
            lsq.converged};
}
} // namespace

LorentzianFit fit_lorentzian(const Spectrum &spectrum, double lo_nm, double hi_nm, const LorentzianOptions &options)
{
    spectrum.validate();
    if (!(hi_nm > lo_nm))
    {
        throw ConfigError("fit_lorentzian: empty wavelength window");
    }
    Window w;
    for (std::size_t k = 0; k < spectrum.wavelength_nm.size(); ++k)
    {
        if (spectrum.wavelength_nm[k] >= lo_nm && spectrum.wavelength_nm[k] <= hi_nm)
        {
            w.x.push_back(spectrum.wavelength_nm[k]);
            w.y.push_back(spectrum.power[k]);
        }
    }
    if (w.x.size() < 7)
    {
        std::ostringstream msg;
        msg << "fit_lorentzian: " << w.x.size() << " samples in the window, need at least 7";
        throw ConfigError(msg.str());
    }
    const auto peak = static_cast<std::size_t>(std::max_element(w.y.begin(), w.y.end()) - w.y.begin());
    if (peak == 0 || peak + 1 == w.x.size())
    {
        throw ConfigError("fit_lorentzian: peak lies at the window edge");
    }
    const double base = *std::min_element(w.y.begin(), w.y.end());
    const double amp0 = w.y[peak] - base;
    const double level = base + 0.5 * amp0;
    const double short_hw = half_width(w, peak, level, -1);
    const double long_hw = half_width(w, peak, level, +1);
    double fwhm0 = 0.25 * (w.x.back() - w.x.front());
    if (short_hw > 0.0 && long_hw > 0.0)
    {
        fwhm0 = short_hw + long_hw;
    }
    else if (short_hw > 0.0 || long_hw > 0.0)
    {
        fwhm0 = 2.0 * std::max(short_hw, long_hw);
    }
    std::vector<double> spacing;
    for (std::size_t k = 1; k < w.x.size(); ++k)
    {
        spacing.push_back(w.x[k] - w.x[k - 1]);
    }
    std::nth_element(spacing.begin(), spacing.begin() + static_cast<long>(spacing.size() / 2), spacing.end());
    const double median_spacing = spacing[spacing.size() / 2];
    fwhm0 = std::max(fwhm0, median_spacing);

    bool lopsided = false;
    if (short_hw > 0.0 && long_hw > 0.0)
    {
        lopsided = std::abs(long_hw - short_hw) / (long_hw + short_hw) > options.asymmetry_limit;
    }
    const bool use_half = options.half_window == HalfWindow::long_side ||
                          (options.half_window == HalfWindow::automatic && lopsided);
    Window fit_w = w;
    if (use_half)
    {
        // Long-wavelength half plus the sample just below the peak.
        const std::size_t from = peak - 1;
        fit_w.x.assign(w.x.begin() + static_cast<long>(from), w.x.end());
        fit_w.y.assign(w.y.begin() + static_cast<long>(from), w.y.end());
        if (fit_w.x.size() < 7)
        {
            throw ConfigError("fit_lorentzian: fewer than 7 samples on the long-wavelength side of the peak");
        }
    }

    const auto p = fit_window(fit_w, base, amp0, w.x[peak], fwhm0, options.max_evaluations);
    if (!p.converged || !std::isfinite(p.fwhm) || !(p.fwhm > 0.0))
    {
        throw ComputeError("fit_lorentzian: least squares did not converge");
    }
    LorentzianFit fit;
    fit.lambda0_nm = p.center;
    fit.fwhm_nm = p.fwhm;
    fit.amplitude = p.amplitude;
    fit.offset = p.offset;
    fit.q_loaded = p.center / p.fwhm;
    fit.samples = fit_w.x.size();
    fit.residual = std::sqrt(p.sse / static_cast<double>(fit_w.x.size()));
    fit.asymmetric = use_half;
    const auto corrected = deconvolve_resolution(p.fwhm, spectrum.resolution_nm,
                                                 spectrum.resolution_nm > 0.0 ? BroadeningModel::gaussian_quadrature
                                                                              : BroadeningModel::none);
    fit.fwhm_corrected_nm = corrected.fwhm_nm;
    fit.q_corrected = corrected.fwhm_nm > 0.0 ? p.center / corrected.fwhm_nm : 0.0;
    fit.resolution_limited = p.fwhm < 2.0 * median_spacing || corrected.resolution_limited;
    return fit;
}

Deconvolved deconvolve_resolution(double fwhm_measured_nm, double fwhm_instrument_nm, BroadeningModel model)
{
    if (!(fwhm_measured_nm > 0.0) || !(fwhm_instrument_nm >= 0.0))
    {
        throw ConfigError("deconvolve_resolution: need measured width > 0 and instrument width >= 0");
    }
    if (model == BroadeningModel::none)
    {
        return {fwhm_measured_nm, false};
    }
    if (fwhm_measured_nm <= fwhm_instrument_nm)
    {
        return {0.0, true};
    }
    return {std::sqrt(fwhm_measured_nm * fwhm_measured_nm - fwhm_instrument_nm * fwhm_instrument_nm), false};
}

} // namespace phcav::spectra
