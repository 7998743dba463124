#pragma once

// Mode analysis on FDTD output: resonance extraction from probe records,
// ringdown Q, effective mode volume, Fourier-space light-cone content and
// Gaussian envelope fits of the energy density.
//
// Frequencies are normalized (a / lambda, with c = 1 and a = 1), lengths on the
// grid are in nm unless a key says otherwise.

#include "phcav/fdtd.hpp"
#include "phcav/geometry.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace phcav::modes
{

struct ResonanceEstimate
{
    double freq = 0.0;       ///< a / lambda
    double q = 0.0;          ///< omega / (2 gamma), capped
    double decay_rate = 0.0; ///< gamma: field envelope ~ exp(-gamma t)
    double amplitude = 0.0;  ///< at t_ref
    double phase = 0.0;      ///< rad, at t_ref
    double t_ref = 0.0;      ///< first analyzed sample time
    double confidence = 0.0; ///< relative residual of the whole fit
    bool q_capped = false;
    bool lifetime_exceeds_record = false;
};

struct HarmonicInversionOptions
{
    double sv_cutoff = 1e-8;
    double q_cap = 1e9;
    /// Pencil parameter cap (number of columns of the Hankel matrix minus one).
    int max_pencil = 100;
    /// Decimated samples beyond this are dropped (the fit uses the earliest ones).
    int max_samples = 1 << 15;
    /// Components weaker than this fraction of the strongest in-band one, or of the
    /// record's peak sample, are dropped (filter stop-band residue).
    double min_relative_amplitude = 1e-5;
};

struct HarmonicInversionResult
{
    std::vector<ResonanceEstimate> modes;
    std::vector<std::string> warnings;
    bool ill_conditioned = false;
    int model_order = 0;
    int decimation = 1;
};

/// Matrix-pencil decomposition of a real signal into damped sinusoids
/// A exp(-gamma (t - t_ref)) cos(omega (t - t_ref) + phase), restricted to
/// [f_lo, f_hi]. Samples sit at t0 + k dt. Modes are sorted by amplitude.
HarmonicInversionResult harmonic_inversion(std::span<const double> samples, double dt, double t0, double f_lo,
                                           double f_hi, int max_modes, const HarmonicInversionOptions &options = {});

/// Same on a probe record, skipping the source window (samples before start_step).
HarmonicInversionResult harmonic_inversion(const fdtd::FieldRecord &record, double f_lo, double f_hi, int max_modes,
                                           const HarmonicInversionOptions &options = {});

struct RingdownFit
{
    double q = 0.0;
    double r2 = 0.0;
    double decay_slope = 0.0; ///< d ln U / dt
    std::size_t points = 0;
};

/// Log-linear fit of U(t) = U0 exp(-omega t / Q). Throws ComputeError when the
/// log-residual shows structure (beating) well above its sample-to-sample noise.
RingdownFit ringdown_q(std::span<const double> times, std::span<const double> energy, double freq);

/// Energy series from an FDTD run, starting at `from_step`.
RingdownFit ringdown_q(const std::vector<fdtd::EnergySample> &series, double freq, long from_step = 0);

/// Field record: per-period peak envelope squared stands in for the energy.
RingdownFit ringdown_q(const fdtd::FieldRecord &record, double freq);

struct ModeVolumeOptions
{
    /// Index for the (lambda / 2n) units; <= 0 selects the grid's n_eff.
    double index = 0.0;
    /// Optional effective slab height for the pseudo-3D figure.
    std::optional<double> effective_height_nm;
};

struct ModeVolumeResult
{
    double area_nm2 = 0.0;     ///< 2D: integral of eps |E|^2 over its peak
    double area_a2 = 0.0;
    double v_eff_air_2d = 0.0; ///< in (lambda / 2)^2
    double v_eff_material_2d = 0.0; ///< in (lambda / 2n)^2, = v_eff_air_2d n^2
    std::optional<double> v_eff_air_3d;      ///< (lambda / 2)^3, only with a height
    std::optional<double> v_eff_material_3d; ///< (lambda / 2n)^3 = v_eff_air_3d n^3
    double index = 1.0;
    double wavelength_nm = 0.0;
    double peak_x_nm = 0.0;
    double peak_y_nm = 0.0;
    double peak_density = 0.0;
    /// False when the peak sits on the outermost ring of cells.
    bool valid = true;
};

ModeVolumeResult mode_volume(const fdtd::Snapshot &snapshot, const geometry::DielectricGrid &grid, double freq,
                             const ModeVolumeOptions &options = {});

/// eps |E|^2 per cell.
std::vector<double> electric_energy_density(const fdtd::Snapshot &snapshot, const geometry::DielectricGrid &grid);

/// Index of the snapshot with the largest electric energy (the cycle maximum
/// when the snapshots sample at least half a period densely).
std::size_t cycle_max_snapshot(const std::vector<fdtd::Snapshot> &snapshots, const geometry::DielectricGrid &grid);

struct FourierMap
{
    int nx = 0;
    int ny = 0;
    std::vector<double> kx; ///< 2 pi / a, FFT order (zero first)
    std::vector<double> ky;
    std::vector<double> power; ///< |FT|^2, row-major (row = ky)
    double light_cone_radius = 0.0;
};

/// |DFT|^2 of a real field after a per-axis Tukey taper (fraction 0 disables it).
FourierMap fourier_power(std::span<const double> field, int nx, int ny, double dx_a, double taper_fraction);

struct LightConeOptions
{
    fdtd::Component component = fdtd::Component::Ex;
    double taper_fraction = 0.1;
};

struct LightConeResult
{
    double fraction = 0.0;             ///< power inside |k| < freq n_clad over total
    double dc_fraction = 0.0;          ///< k = 0 bin over total, tapered field
    double dc_fraction_untapered = 0.0;
    double dc_power = 0.0;
    double dc_power_untapered = 0.0;
    double total_power = 0.0;
    FourierMap map;
};

LightConeResult light_cone_fraction(const fdtd::Snapshot &snapshot, const geometry::DielectricGrid &grid, double freq,
                                    double n_clad, const LightConeOptions &options = {});

struct EnvelopeFit
{
    double sigma_x_nm = 0.0;
    double sigma_y_nm = 0.0;
    double center_x_nm = 0.0;
    double center_y_nm = 0.0;
    double amplitude = 0.0;
    double r2 = 0.0;
    bool poor_fit = false;
    int window_cells = 0;
};

/// Gaussian fit to the per-axis envelope of a density map co-registered with
/// `grid`: the profile along x is the maximum over y, followed by a running
/// maximum over +-a/2. The model is put through the same running maximum, so
/// an exact Gaussian is recovered exactly.
EnvelopeFit envelope_gaussian_fit(std::span<const double> density, const geometry::DielectricGrid &grid);

} // namespace phcav::modes
