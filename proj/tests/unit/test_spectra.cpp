#include "doctest.h"

#include "phcav/error.hpp"
#include "phcav/laser.hpp"
#include "phcav/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace phcav;
using namespace phcav::spectra;

namespace
{
constexpr double deg = std::numbers::pi / 180.0;

Spectrum lorentzian(double lambda0, double fwhm, double amp, double offset, double lo, double hi, int n)
{
    Spectrum s;
    for (int k = 0; k < n; ++k)
    {
        const double l = lo + (hi - lo) * k / (n - 1);
        const double u = 2.0 * (l - lambda0) / fwhm;
        s.wavelength_nm.push_back(l);
        s.power.push_back(offset + amp / (1.0 + u * u));
    }
    return s;
}

void two_segment(double knee, double s_below, double s_above, int n, double p_lo, double p_hi, std::vector<double> &pump,
                 std::vector<double> &power)
{
    pump.clear();
    power.clear();
    for (int k = 0; k < n; ++k)
    {
        const double p = p_lo + (p_hi - p_lo) * k / (n - 1);
        pump.push_back(p);
        power.push_back(p < knee ? s_below * p : s_below * knee + s_above * (p - knee));
    }
}

double threshold_from_laser(const laser::RateEqnParams &params)
{
    const double pth = laser::threshold_uW(params);
    std::vector<double> pump;
    std::vector<double> line;
    for (int k = 0; k < 30; ++k)
    {
        pump.push_back(pth * (0.1 + 2.9 * k / 29.0));
        line.push_back(laser::steady_state(params, pump.back()).emitted_arb);
    }
    return fit_threshold(pump, line, ThresholdSignal::line).p_threshold_uW;
}
} // namespace

TEST_CASE("Lorentzian at 1298.5 nm with 0.100 nm width gives Q 12985")
{
    const Spectrum s = lorentzian(1298.5, 0.100, 1.0, 0.02, 1297.5, 1299.5, 401);
    const LorentzianFit f = fit_lorentzian(s, 1297.5, 1299.5);
    CHECK(f.q_loaded == doctest::Approx(12985.0).epsilon(1e-8));
    CHECK(f.q_loaded == f.lambda0_nm / f.fwhm_nm);
    CHECK(!f.resolution_limited);
    CHECK(!f.asymmetric);
}

TEST_CASE("exact Lorentzians are recovered to 1e-8")
{
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial)
    {
        const double l0 = 900.0 + 700.0 * u(rng);
        const double w = 0.05 + 0.5 * u(rng);
        const double a = std::pow(10.0, -3.0 + 6.0 * u(rng));
        const double off = a * 0.2 * u(rng);
        const double shift = (u(rng) - 0.5) * 0.5 * w;
        const Spectrum s = lorentzian(l0 + shift, w, a, off, l0 - 8.0 * w, l0 + 8.0 * w, 321);
        const LorentzianFit f = fit_lorentzian(s, l0 - 8.0 * w, l0 + 8.0 * w);
        CHECK(f.lambda0_nm == doctest::Approx(l0 + shift).epsilon(1e-8));
        CHECK(f.fwhm_nm == doctest::Approx(w).epsilon(1e-8));
        CHECK(f.amplitude == doctest::Approx(a).epsilon(1e-8));
    }
}

TEST_CASE("Lorentzian with 2% noise: bias under 1%, scatter under 3% over 200 trials")
{
    std::mt19937 rng(17);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<double> w;
    for (int trial = 0; trial < 200; ++trial)
    {
        Spectrum s = lorentzian(1298.5, 0.1, 1.0, 0.05, 1297.9, 1299.1, 241);
        for (double &p : s.power)
        {
            p *= 1.0 + noise(rng);
        }
        w.push_back(fit_lorentzian(s, 1297.9, 1299.1).fwhm_nm);
    }
    double mean = 0.0;
    for (double v : w)
    {
        mean += v;
    }
    mean /= w.size();
    double var = 0.0;
    for (double v : w)
    {
        var += (v - mean) * (v - mean);
    }
    const double scatter = std::sqrt(var / (w.size() - 1)) / 0.1;
    CHECK(std::abs(mean / 0.1 - 1.0) < 0.01);
    CHECK(scatter < 0.03);
}

TEST_CASE("Lorentzian flags: resolution limit, asymmetry and preconditions")
{
    const Spectrum coarse = lorentzian(1298.5, 0.1, 1.0, 0.0, 1296.0, 1301.0, 61);
    CHECK(fit_lorentzian(coarse, 1296.0, 1301.0).resolution_limited);

    // A thermally broadened line: extra tail on the short-wavelength side.
    Spectrum lop = lorentzian(1298.5, 0.1, 1.0, 0.01, 1297.5, 1299.5, 401);
    const Spectrum tail = lorentzian(1298.38, 0.25, 0.5, 0.0, 1297.5, 1299.5, 401);
    for (std::size_t k = 0; k < lop.power.size(); ++k)
    {
        lop.power[k] += tail.power[k];
    }
    const LorentzianFit f = fit_lorentzian(lop, 1297.5, 1299.5);
    CHECK(f.asymmetric);

    const Spectrum s = lorentzian(1298.5, 0.1, 1.0, 0.0, 1297.5, 1299.5, 401);
    CHECK_THROWS_AS(fit_lorentzian(s, 1298.5, 1298.51), ConfigError);
    CHECK_THROWS_AS(fit_lorentzian(s, 1298.6, 1299.5), ConfigError);
    Spectrum bad = s;
    bad.power[3] = -1.0;
    CHECK_THROWS_AS(fit_lorentzian(bad, 1297.5, 1299.5), ConfigError);
}

TEST_CASE("resolution deconvolution")
{
    CHECK(deconvolve_resolution(0.10, 0.0, BroadeningModel::gaussian_quadrature).fwhm_nm == doctest::Approx(0.10));
    const Deconvolved edge = deconvolve_resolution(0.08, 0.08, BroadeningModel::gaussian_quadrature);
    CHECK(edge.fwhm_nm == 0.0);
    CHECK(edge.resolution_limited);
    CHECK(deconvolve_resolution(0.10, 0.08, BroadeningModel::gaussian_quadrature).fwhm_nm ==
          doctest::Approx(0.06).epsilon(1e-12));
    CHECK(deconvolve_resolution(0.10, 0.08, BroadeningModel::none).fwhm_nm == 0.10);
    CHECK_THROWS_AS(deconvolve_resolution(0.0, 0.08, BroadeningModel::none), ConfigError);

    Spectrum s = lorentzian(1298.5, 0.1, 1.0, 0.0, 1297.5, 1299.5, 401);
    s.resolution_nm = 0.08;
    const LorentzianFit f = fit_lorentzian(s, 1297.5, 1299.5);
    CHECK(f.fwhm_corrected_nm == doctest::Approx(0.06).epsilon(1e-6));
    CHECK(f.q_corrected == doctest::Approx(f.lambda0_nm / f.fwhm_corrected_nm));
}

TEST_CASE("two-segment threshold: exact knee, affine and pump-scale invariance")
{
    std::vector<double> pump;
    std::vector<double> power;
    two_segment(360.0, 0.05, 1.0, 40, 36.0, 1080.0, pump, power);
    const ThresholdFit f = fit_threshold(pump, power, ThresholdSignal::line);
    CHECK(std::abs(f.p_threshold_uW - 360.0) <= 1.0);
    CHECK(f.above.slope > f.below.slope);

    std::vector<double> affine(power);
    for (double &v : affine)
    {
        v = 3.7 * v + 12.0;
    }
    CHECK(fit_threshold(pump, affine, ThresholdSignal::line).p_threshold_uW ==
          doctest::Approx(f.p_threshold_uW).epsilon(1e-9));

    std::vector<double> scaled(pump);
    for (double &v : scaled)
    {
        v *= 2.5;
    }
    CHECK(fit_threshold(scaled, power, ThresholdSignal::line).p_threshold_uW ==
          doctest::Approx(2.5 * f.p_threshold_uW).epsilon(1e-9));
}

TEST_CASE("straight line has no threshold")
{
    std::vector<double> pump;
    std::vector<double> power;
    for (int k = 0; k < 30; ++k)
    {
        pump.push_back(10.0 + 10.0 * k);
        power.push_back(0.3 * pump.back() + 1.0);
    }
    CHECK_THROWS_WITH_AS(fit_threshold(pump, power, ThresholdSignal::line), doctest::Contains("no threshold detected"),
                         ComputeError);
    CHECK_THROWS_AS(fit_threshold(std::span(pump).first(6), std::span(power).first(6), ThresholdSignal::line),
                    ConfigError);
}

TEST_CASE("background threshold is the knee abscissa")
{
    LLData d;
    std::vector<double> line;
    two_segment(360.0, 0.05, 1.0, 40, 36.0, 1080.0, d.pump_uW, line);
    d.line_power = line;
    // Background rises, then nearly saturates past the knee at 125.
    for (double p : d.pump_uW)
    {
        d.background_power.push_back(p < 125.0 ? 0.02 * p : 0.02 * 125.0 + 0.004 * (p - 125.0));
    }
    const ThresholdFit f = fit_threshold(d, ThresholdSignal::background);
    CHECK(f.p_threshold_uW == doctest::Approx(125.0).epsilon(0.01));
    d.background_power.clear();
    CHECK_THROWS_AS(fit_threshold(d, ThresholdSignal::background), ConfigError);
}

TEST_CASE("threshold fitted from a rate-equation L-L curve matches the model")
{
    const laser::RateEqnParams p;
    CHECK(threshold_from_laser(p) == doctest::Approx(laser::threshold_uW(p)).epsilon(0.1));
}

TEST_CASE("thresholds scale nearly linearly with pump area")
{
    laser::RateEqnParams diffuse;
    diffuse.v_active_cm3 = laser::active_volume_cm3(21.0, 30.0);
    laser::RateEqnParams focused = diffuse;
    focused.v_active_cm3 = laser::active_volume_cm3(8.0, 30.0);
    const double ratio = threshold_from_laser(diffuse) / threshold_from_laser(focused);
    CHECK(ratio == doctest::Approx(21.0 / 8.0).epsilon(0.25));
}

TEST_CASE("polarization fit: exact, unpolarized and period invariance")
{
    std::vector<double> ang;
    std::vector<double> pw;
    for (int k = 0; k < 37; ++k)
    {
        ang.push_back(k * 10.0 * deg);
        const double c = std::cos(ang.back());
        pw.push_back(4.0 * c * c + 0.2 * (1.0 - c * c));
    }
    const PolarizationFit f = polarization_fit(ang, pw);
    CHECK(f.p_max == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(f.p_min == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(std::remainder(f.theta0_rad, std::numbers::pi)) < 1e-12);
    CHECK(f.extinction_ratio == doctest::Approx(20.0).epsilon(1e-12));

    std::vector<double> shifted(ang);
    for (double &a : shifted)
    {
        a += std::numbers::pi;
    }
    CHECK(polarization_fit(shifted, pw).residual == doctest::Approx(f.residual).epsilon(1e-9));

    const std::vector<double> flat(ang.size(), 1.5);
    const PolarizationFit u = polarization_fit(ang, flat);
    CHECK(u.p_max == doctest::Approx(u.p_min).epsilon(1e-12));
    CHECK(u.theta_undetermined);

    std::vector<double> narrow(ang.begin(), ang.begin() + 8);
    CHECK_THROWS_AS(polarization_fit(narrow, std::span(pw).first(8)), ConfigError);
}

TEST_CASE("polarization fit clamps a negative minimum")
{
    std::vector<double> ang;
    std::vector<double> pw;
    for (int k = 0; k < 19; ++k)
    {
        ang.push_back(k * 10.0 * deg);
        const double c = std::cos(ang.back());
        pw.push_back(std::max(0.0, 2.0 * c * c - 0.1));
    }
    const PolarizationFit f = polarization_fit(ang, pw);
    CHECK(f.p_min == 0.0);
    CHECK(f.p_min_clamped);
}

TEST_CASE("polarization fit with 5% noise: angle within 2 deg, ratio within 30%")
{
    std::mt19937 rng(23);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int trial = 0; trial < 200; ++trial)
    {
        std::vector<double> ang;
        std::vector<double> pw;
        for (int k = 0; k < 37; ++k)
        {
            ang.push_back(k * 10.0 * deg);
            const double c = std::cos(ang.back() - 10.0 * deg);
            pw.push_back((20.0 * c * c + (1.0 - c * c)) * (1.0 + noise(rng)));
        }
        const PolarizationFit f = polarization_fit(ang, pw);
        CHECK(std::abs(std::remainder(f.theta0_rad - 10.0 * deg, std::numbers::pi)) < 2.0 * deg);
        CHECK(f.extinction_ratio == doctest::Approx(20.0).epsilon(0.3));
    }
}

TEST_CASE("pump overlap: normalization, Gaussian width and numeric overlap oracle")
{
    modes::EnvelopeFit env;
    env.sigma_x_nm = 700.0;
    env.sigma_y_nm = 500.0;
    env.center_x_nm = 100.0;
    env.center_y_nm = -50.0;
    const double beam = beam_sigma_from_area_nm(8.0);
    CHECK(2.0 * std::numbers::pi * beam * beam == doctest::Approx(8e6).epsilon(1e-12));

    const double cx = std::hypot(700.0, beam);
    const std::vector<PumpPosition> pos = {{100.0, -50.0}, {100.0 + cx, -50.0}};
    const auto r = pump_overlap_scan(env, beam, pos);
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    // Direct overlap integral of the beam with the mode envelope on a grid.
    auto overlap = [&](double dx_nm) {
        double sum = 0.0;
        const double h = 25.0;
        for (double y = -4000.0; y <= 4000.0; y += h)
        {
            for (double x = -6000.0; x <= 6000.0; x += h)
            {
                const double mode = std::exp(-x * x / (2 * 700.0 * 700.0) - y * y / (2 * 500.0 * 500.0));
                const double b = std::exp(-((x - dx_nm) * (x - dx_nm) + y * y) / (2 * beam * beam));
                sum += mode * b;
            }
        }
        return sum;
    };
    const double zero = overlap(0.0);
    std::vector<PumpPosition> scan;
    for (int k = 0; k <= 16; ++k)
    {
        scan.push_back({100.0 + 250.0 * k, -50.0});
    }
    const auto curve = pump_overlap_scan(env, beam, scan);
    for (std::size_t k = 0; k < scan.size(); ++k)
    {
        CHECK(curve[k] == doctest::Approx(overlap(250.0 * k) / zero).epsilon(1e-6));
        if (k > 0)
        {
            CHECK(curve[k] < curve[k - 1]);
        }
    }
    // Half power sits further out than the beam alone would put it.
    const double half_beam_alone = beam * std::sqrt(2.0 * std::log(2.0));
    const auto at = pump_overlap_scan(env, beam, std::vector<PumpPosition>{{100.0 + half_beam_alone, -50.0}});
    CHECK(at[0] > 0.5);
}
