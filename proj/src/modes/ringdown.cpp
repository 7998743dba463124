#include "phcav/error.hpp"
#include "phcav/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace phcav::modes
{

RingdownFit ringdown_q(std::span<const double> times, std::span<const double> energy, double freq)
{
    if (times.size() != energy.size() || times.size() < 3)
    {
        throw ConfigError("ringdown_q: need at least 3 (time, energy) pairs of equal length");
    }
    if (!(freq > 0.0))
    {
        throw ConfigError("ringdown_q: frequency must be positive");
    }
    const std::size_t n = times.size();
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        if (!(energy[k] > 0.0))
        {
            throw ComputeError("ringdown_q: energy series has non-positive samples");
        }
        y[k] = std::log(energy[k]);
    }
    double mt = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        mt += times[k];
        my += y[k];
    }
    mt /= n;
    my /= n;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        stt += (times[k] - mt) * (times[k] - mt);
        sty += (times[k] - mt) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (stt <= 0.0)
    {
        throw ConfigError("ringdown_q: times must not all coincide");
    }
    const double slope = sty / stt;
    std::vector<double> res(n);
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        res[k] = y[k] - (my + slope * (times[k] - mt));
        sse += res[k] * res[k];
    }

    // Beating leaves a smooth residual: large compared with the point-to-point
    // scatter that white noise would produce.
    const double rms = std::sqrt(sse / n);
    double diff2 = 0.0;
    for (std::size_t k = 1; k < n; ++k)
    {
        diff2 += (res[k] - res[k - 1]) * (res[k] - res[k - 1]);
    }
    const double scatter = std::sqrt(diff2 / (2.0 * (n - 1)));
    if (rms > 0.05 && rms > 3.0 * scatter)
    {
        std::ostringstream msg;
        msg << "ringdown_q: envelope is not a single exponential (log residual rms " << rms
            << "); several modes are beating, use harmonic_inversion";
        throw ComputeError(msg.str());
    }
    if (!(slope < 0.0))
    {
        throw ComputeError("ringdown_q: energy does not decay over the fitted segment");
    }
    RingdownFit fit;
    fit.decay_slope = slope;
    fit.q = -2.0 * std::numbers::pi * freq / slope;
    fit.r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    fit.points = n;
    return fit;
}

RingdownFit ringdown_q(const std::vector<fdtd::EnergySample> &series, double freq, long from_step)
{
    std::vector<double> t, u;
    for (const auto &s : series)
    {
        if (s.step >= from_step)
        {
            t.push_back(s.time);
            u.push_back(s.energy);
        }
    }
    return ringdown_q(t, u, freq);
}

RingdownFit ringdown_q(const fdtd::FieldRecord &record, double freq)
{
    if (!(freq > 0.0) || !(record.dt > 0.0))
    {
        throw ConfigError("ringdown_q: frequency and record dt must be positive");
    }
    const auto per = static_cast<std::size_t>(std::ceil(1.0 / (freq * record.dt)));
    const auto start = static_cast<std::size_t>(std::max(0L, record.start_step));
    std::vector<double> t, u;
    for (std::size_t k0 = start; k0 + per <= record.samples.size(); k0 += per)
    {
        std::size_t best = k0;
        for (std::size_t k = k0; k < k0 + per; ++k)
        {
            if (std::abs(record.samples[k]) > std::abs(record.samples[best]))
            {
                best = k;
            }
        }
        t.push_back(record.time(best));
        u.push_back(record.samples[best] * record.samples[best]);
    }
    return ringdown_q(t, u, freq);
}

} // namespace phcav::modes
