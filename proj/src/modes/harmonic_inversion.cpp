#include "phcav/error.hpp"
#include "phcav/modes.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace phcav::modes
{
namespace
{
using cd = std::complex<double>;
constexpr double two_pi = 2.0 * std::numbers::pi;

// Blackman-windowed sinc low-pass, unit DC gain. Cutoff and transition width
// in cycles per sample.
std::vector<double> lowpass_taps(double cutoff, double transition)
{
    const int half = static_cast<int>(std::ceil(2.75 / transition));
    const int n = 2 * half + 1;
    std::vector<double> h(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int k = 0; k < n; ++k)
    {
        const double m = k - half;
        const double x = 2.0 * cutoff * m;
        const double sinc = m == 0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double w = 0.42 - 0.5 * std::cos(two_pi * k / (n - 1)) + 0.08 * std::cos(2.0 * two_pi * k / (n - 1));
        h[static_cast<std::size_t>(k)] = w * sinc;
        sum += h[static_cast<std::size_t>(k)];
    }
    for (double &v : h)
    {
        v /= sum;
    }
    return h;
}

// Filter response to exp(s t): sum_k h[k] exp(-s k dt).
cd response(const std::vector<double> &h, cd s, double dt)
{
    cd acc = 0.0;
    const cd step = std::exp(-s * dt);
    cd w = 1.0;
    for (double v : h)
    {
        acc += v * w;
        w *= step;
    }
    return acc;
}

struct Fit
{
    std::vector<cd> poles; ///< per decimated sample
    Eigen::VectorXcd amps;
    double residual = 0.0;
    double cond = 0.0;
};

Fit least_squares_amplitudes(const Eigen::VectorXcd &y, const std::vector<cd> &poles)
{
    const Eigen::Index m = y.size();
    const Eigen::Index r = static_cast<Eigen::Index>(poles.size());
    Eigen::MatrixXcd v(m, r);
    for (Eigen::Index j = 0; j < r; ++j)
    {
        const cd lg = std::log(poles[static_cast<std::size_t>(j)]);
        for (Eigen::Index k = 0; k < m; ++k)
        {
            v(k, j) = std::exp(lg * static_cast<double>(k));
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // Minimum-norm solution: spurious near-dependent columns get small weights
    // instead of huge cancelling ones.
    svd.setThreshold(1e-10);
    Fit fit;
    fit.poles = poles;
    fit.amps = svd.solve(y);
    const auto &sv = svd.singularValues();
    fit.cond = sv.size() > 0 && sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    const double norm = y.norm();
    fit.residual = norm > 0.0 ? (y - v * fit.amps).norm() / norm : 0.0;
    return fit;
}
} // namespace

HarmonicInversionResult harmonic_inversion(std::span<const double> samples, double dt, double t0, double f_lo,
                                           double f_hi, int max_modes, const HarmonicInversionOptions &options)
{
    if (!(dt > 0.0) || !(f_lo >= 0.0) || !(f_hi > f_lo))
    {
        throw ConfigError("harmonic_inversion: need dt > 0 and a band 0 <= f_lo < f_hi");
    }
    if (max_modes < 1)
    {
        throw ConfigError("harmonic_inversion: max_modes must be >= 1");
    }
    const std::size_t n = samples.size();
    const double lowest = f_lo > 0.0 ? f_lo : f_hi;
    if (static_cast<double>(n) * dt < 10.0 / lowest)
    {
        std::ostringstream msg;
        msg << "harmonic_inversion: record spans " << n * dt << " time units, fewer than 10 periods of f = " << lowest;
        throw ConfigError(msg.str());
    }

    HarmonicInversionResult result;
    const double fc = 0.5 * (f_lo + f_hi);
    const double half_band = 0.5 * (f_hi - f_lo);
    const double wc = two_pi * fc;

    // Demodulated samples z_k = x_k exp(-i wc k dt); the reference time is t0.
    std::vector<cd> z(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        z[k] = samples[k] * std::exp(cd(0.0, -wc * static_cast<double>(k) * dt));
    }

    // Narrow bands are low-passed and decimated; the image at -2 fc must fall in
    // the stop band for that, otherwise the full-rate signal is fitted directly.
    std::vector<double> taps;
    int decim = 1;
    const bool narrow = fc >= 1.5 * half_band;
    if (narrow)
    {
        decim = std::max(1, static_cast<int>(std::floor(1.0 / (3.0 * half_band * dt))));
    }
    if (decim > 1)
    {
        taps = lowpass_taps(1.5 * half_band * dt, half_band * dt);
        if (taps.size() + 64 > n)
        {
            taps.clear();
            decim = 1;
            result.warnings.push_back("record too short for the band filter; fitting unfiltered samples");
        }
        else
        {
            // Keep enough decimated samples for a full pencil plus a fit over it.
            const std::size_t room = n - taps.size();
            const std::size_t want = std::max<std::size_t>(64, 4 * static_cast<std::size_t>(options.max_pencil));
            decim = std::max(1, std::min(decim, static_cast<int>(room / want)));
        }
    }
    const std::size_t lead = taps.empty() ? 0 : taps.size() - 1;
    std::size_t m = taps.empty() ? n : (n - taps.size()) / static_cast<std::size_t>(decim) + 1;
    if (m > static_cast<std::size_t>(options.max_samples))
    {
        m = static_cast<std::size_t>(options.max_samples);
    }
    Eigen::VectorXcd y(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j)
    {
        const std::size_t at = lead + j * static_cast<std::size_t>(decim);
        if (taps.empty())
        {
            y(static_cast<Eigen::Index>(j)) = z[at];
            continue;
        }
        cd acc = 0.0;
        for (std::size_t k = 0; k < taps.size(); ++k)
        {
            acc += taps[k] * z[at - k];
        }
        y(static_cast<Eigen::Index>(j)) = acc;
    }
    result.decimation = decim;
    const double dt_d = decim * dt;

    const int pencil = static_cast<int>(std::min<std::size_t>(m / 2, static_cast<std::size_t>(options.max_pencil)));
    if (pencil < 2)
    {
        throw ComputeError("harmonic_inversion: too few samples after decimation");
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(m) - pencil;
    Eigen::MatrixXcd hankel(rows, pencil + 1);
    for (Eigen::Index i = 0; i < rows; ++i)
    {
        for (int j = 0; j <= pencil; ++j)
        {
            hankel(i, j) = y(i + j);
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(hankel, Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0)
    {
        return result;
    }
    int order = 0;
    while (order < sv.size() && sv(order) > options.sv_cutoff * sv(0))
    {
        ++order;
    }
    if (order > pencil / 2 && sv(3 * order / 4) > 0.1 * sv(order / 4))
    {
        // Most of the pencil above the cutoff with a flat tail: that tail is a
        // noise floor. Keep what stands clearly above it (4x the median value).
        std::vector<double> tail(sv.data(), sv.data() + sv.size());
        std::nth_element(tail.begin(), tail.begin() + tail.size() / 2, tail.end());
        const double floor = 4.0 * tail[tail.size() / 2];
        int kept = 0;
        while (kept < order && sv(kept) > floor)
        {
            ++kept;
        }
        if (kept < order)
        {
            std::ostringstream msg;
            msg << "singular values level off at a noise floor; model order reduced from " << order << " to " << kept;
            result.warnings.push_back(msg.str());
            order = std::max(kept, 1);
        }
    }
    if (order == pencil)
    {
        result.warnings.push_back("pencil is full rank; noise or more components than the pencil can separate");
    }
    result.model_order = order;

    // Rows of the Hankel matrix live in span(conj V); its shift invariance gives the poles.
    const Eigen::MatrixXcd w = svd.matrixV().leftCols(order).conjugate();
    const Eigen::MatrixXcd w1 = w.topRows(pencil);
    const Eigen::MatrixXcd w2 = w.bottomRows(pencil);
    const Eigen::MatrixXcd shift = w1.completeOrthogonalDecomposition().solve(w2);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(shift, false);
    std::vector<cd> poles;
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k)
    {
        const cd p = eig.eigenvalues()(k);
        if (std::abs(p) > 0.0 && std::isfinite(std::abs(p)))
        {
            poles.push_back(p);
        }
    }
    if (poles.empty())
    {
        return result;
    }

    // Merge numerically coincident poles; they carry no independent information.
    std::vector<cd> distinct;
    for (const cd p : poles)
    {
        const bool dup = std::any_of(distinct.begin(), distinct.end(),
                                     [p](const cd q) { return std::abs(std::log(p / q)) < 1e-9; });
        if (!dup)
        {
            distinct.push_back(p);
        }
    }
    const Fit fit = least_squares_amplitudes(y, distinct);
    if (fit.cond > 1e12)
    {
        result.ill_conditioned = true;
        result.warnings.push_back("ill-conditioned pencil; amplitudes of close components are uncertain");
    }

    const double record = static_cast<double>(m) * dt_d;
    for (std::size_t j = 0; j < fit.poles.size(); ++j)
    {
        const cd s = std::log(fit.poles[j]) / dt_d;
        const double omega = s.imag() + wc;
        const double freq = omega / two_pi;
        if (freq < f_lo || freq > f_hi)
        {
            continue;
        }
        const double gamma = -s.real();
        if (-gamma * record > 0.01)
        {
            std::ostringstream msg;
            msg << "discarded growing component at f = " << freq;
            result.warnings.push_back(msg.str());
            continue;
        }
        // Undo the filter gain and the filter delay.
        cd c = fit.amps(static_cast<Eigen::Index>(j));
        if (!taps.empty())
        {
            c /= response(taps, s, dt) * std::exp(s * (static_cast<double>(lead) * dt));
        }
        ResonanceEstimate est;
        est.freq = freq;
        est.decay_rate = gamma;
        est.amplitude = 2.0 * std::abs(c);
        est.phase = std::arg(c);
        est.t_ref = t0;
        est.confidence = fit.residual;
        if (gamma <= omega / (2.0 * options.q_cap))
        {
            est.q = options.q_cap;
            est.q_capped = true;
        }
        else
        {
            est.q = omega / (2.0 * gamma);
        }
        est.lifetime_exceeds_record = gamma * static_cast<double>(n) * dt < 1.0;
        result.modes.push_back(est);
    }
    std::stable_sort(result.modes.begin(), result.modes.end(),
                     [](const ResonanceEstimate &a, const ResonanceEstimate &b) { return a.amplitude > b.amplitude; });
    if (!result.modes.empty())
    {
        // Relative to the strongest in-band component and to the raw record, so an
        // empty band does not report its filter residue as a mode.
        double record_peak = 0.0;
        for (double v : samples)
        {
            record_peak = std::max(record_peak, std::abs(v));
        }
        const double floor =
            options.min_relative_amplitude * std::max(result.modes.front().amplitude, record_peak);
        std::erase_if(result.modes, [floor](const ResonanceEstimate &e) { return e.amplitude < floor; });
    }
    if (result.modes.size() > static_cast<std::size_t>(max_modes))
    {
        result.modes.resize(static_cast<std::size_t>(max_modes));
    }
    return result;
}

HarmonicInversionResult harmonic_inversion(const fdtd::FieldRecord &record, double f_lo, double f_hi, int max_modes,
                                           const HarmonicInversionOptions &options)
{
    const auto start = static_cast<std::size_t>(std::max(0L, record.start_step));
    if (start >= record.samples.size())
    {
        throw ConfigError("harmonic_inversion: record ends inside the source window");
    }
    const std::span<const double> tail(record.samples.data() + start, record.samples.size() - start);
    return harmonic_inversion(tail, record.dt, record.time(start), f_lo, f_hi, max_modes, options);
}

} // namespace phcav::modes
