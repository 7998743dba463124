#pragma once

// Fits for measured (or synthetic) data: Lorentzian linewidth and loaded Q,
// two-segment threshold extraction from L-L curves, polarizer-angle fits and
// the pump-position response predicted from a Gaussian mode envelope.

#include "phcav/modes.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace phcav::spectra
{

struct Spectrum
{
    std::vector<double> wavelength_nm;
    std::vector<double> power;
    double resolution_nm = 0.0; ///< instrument FWHM, 0 when unknown

    void validate() const;
};

enum class HalfWindow
{
    automatic, ///< fall back to the long-wavelength half when the line is lopsided
    off,
    long_side
};

struct LorentzianOptions
{
    int max_evaluations = 4000;
    HalfWindow half_window = HalfWindow::automatic;
    /// |w_long - w_short| / (w_long + w_short) of the half-max widths above which
    /// the line counts as asymmetric.
    double asymmetry_limit = 0.2;
};

struct LorentzianFit
{
    double lambda0_nm = 0.0;
    double fwhm_nm = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double q_loaded = 0.0; ///< lambda0 / fwhm
    double residual = 0.0; ///< rms of the fit residual, power units
    std::size_t samples = 0;
    bool resolution_limited = false;
    bool asymmetric = false;
    /// Instrument-corrected width and Q (equal to the raw ones without a resolution).
    double fwhm_corrected_nm = 0.0;
    double q_corrected = 0.0;
};

/// Least squares of offset + A / (1 + (2 (lambda - lambda0) / fwhm)^2) over
/// samples inside [lo_nm, hi_nm].
LorentzianFit fit_lorentzian(const Spectrum &spectrum, double lo_nm, double hi_nm, const LorentzianOptions &options = {});

enum class BroadeningModel
{
    gaussian_quadrature,
    none
};

struct Deconvolved
{
    double fwhm_nm = 0.0;
    bool resolution_limited = false;
};

Deconvolved deconvolve_resolution(double fwhm_measured_nm, double fwhm_instrument_nm, BroadeningModel model);

struct LLData
{
    std::vector<double> pump_uW;
    std::vector<double> line_power;
    std::vector<double> background_power;

    void validate() const;
};

enum class ThresholdSignal
{
    line,
    background
};

struct LineFit
{
    double slope = 0.0;
    double intercept = 0.0;
};

struct ThresholdFit
{
    LineFit below;
    LineFit above;
    double p_threshold_uW = 0.0;
    /// Half-open index ranges [first, last) of the two segments.
    std::pair<std::size_t, std::size_t> below_range;
    std::pair<std::size_t, std::size_t> above_range;
    double sse = 0.0;
    double sse_single_line = 0.0;
};

/// Exhaustive split search; each side needs at least 4 points. p_threshold is
/// where the two fitted lines cross. Throws ComputeError("no threshold
/// detected") when two lines do not beat one line by more than 5% residual.
ThresholdFit fit_threshold(std::span<const double> pump_uW, std::span<const double> power, ThresholdSignal which);
ThresholdFit fit_threshold(const LLData &data, ThresholdSignal which);

struct PolarizationFit
{
    double p_max = 0.0;
    double p_min = 0.0;
    double theta0_rad = 0.0;       ///< in [0, pi)
    double extinction_ratio = 0.0; ///< p_max / p_min, inf when p_min = 0
    double residual = 0.0;         ///< rms
    bool p_min_clamped = false;
    bool theta_undetermined = false;
};

/// P(theta) = p_max cos^2(theta - theta0) + p_min sin^2(theta - theta0).
PolarizationFit polarization_fit(std::span<const double> angles_rad, std::span<const double> powers);

/// Gaussian beam sigma for a spot of the given area (area = 2 pi sigma^2).
double beam_sigma_from_area_nm(double area_um2);

struct PumpPosition
{
    double x_nm;
    double y_nm;
};

/// Relative emitted power for a Gaussian pump of width beam_sigma centered at
/// each position: the overlap with the mode envelope, 1 at the envelope center.
std::vector<double> pump_overlap_scan(const modes::EnvelopeFit &envelope, double beam_sigma_nm,
                                      std::span<const PumpPosition> positions);

} // namespace phcav::spectra
