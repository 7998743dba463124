#include "doctest.h"

#include "phcav/error.hpp"
#include "phcav/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace phcav;
using namespace phcav::modes;
using geometry::DielectricGrid;

namespace
{
constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<double> damped(std::size_t n, double dt, double f, double q, double amp = 1.0, double phase = 0.0)
{
    const double w = two_pi * f;
    const double gamma = q > 0.0 ? w / (2.0 * q) : 0.0;
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double t = k * dt;
        s[k] = amp * std::exp(-gamma * t) * std::cos(w * t + phase);
    }
    return s;
}

fdtd::Snapshot blank_snapshot(const DielectricGrid &g)
{
    fdtd::Snapshot s;
    s.nx = g.nx;
    s.ny = g.ny;
    const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
    s.hz.assign(n, 0.0);
    s.ex.assign(n, 0.0);
    s.ey.assign(n, 0.0);
    return s;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}
} // namespace

TEST_CASE("harmonic inversion recovers a single high-Q mode")
{
    const double dt = 0.05;
    const auto s = damped(1 << 16, dt, 0.25, 1e4, 2.0, 0.7);
    const auto r = harmonic_inversion(s, dt, 0.0, 0.2, 0.3, 4);
    REQUIRE(!r.modes.empty());
    const auto &m = r.modes.front();
    CHECK(m.q == doctest::Approx(1e4).epsilon(0.01));
    CHECK(std::abs(m.freq / 0.25 - 1.0) < 1e-5);
    CHECK(m.amplitude == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(std::remainder(m.phase - 0.7, two_pi) == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(!m.q_capped);
}

TEST_CASE("harmonic inversion caps an undamped sinusoid and flags its lifetime")
{
    const double dt = 0.05;
    const auto s = damped(1 << 14, dt, 0.25, 0.0);
    const auto r = harmonic_inversion(s, dt, 0.0, 0.2, 0.3, 4);
    REQUIRE(!r.modes.empty());
    CHECK(r.modes.front().q >= 1e9);
    CHECK(r.modes.front().q_capped);
    CHECK(r.modes.front().lifetime_exceeds_record);
}

TEST_CASE("harmonic inversion separates two modes five linewidths apart")
{
    const double dt = 0.05;
    const double q = 1e3;
    const double f1 = 0.25;
    const double f2 = f1 * (1.0 + 5.0 / q);
    auto s = damped(1 << 16, dt, f1, q);
    const auto s2 = damped(1 << 16, dt, f2, q, 1.0, 1.0);
    for (std::size_t k = 0; k < s.size(); ++k)
    {
        s[k] += s2[k];
    }
    const auto r = harmonic_inversion(s, dt, 0.0, 0.2, 0.3, 4);
    REQUIRE(r.modes.size() >= 2);
    std::vector<ResonanceEstimate> two(r.modes.begin(), r.modes.begin() + 2);
    std::sort(two.begin(), two.end(), [](const auto &a, const auto &b) { return a.freq < b.freq; });
    CHECK(two[0].freq == doctest::Approx(f1).epsilon(1e-6));
    CHECK(two[1].freq == doctest::Approx(f2).epsilon(1e-6));
    CHECK(two[0].q == doctest::Approx(q).epsilon(0.05));
    CHECK(two[1].q == doctest::Approx(q).epsilon(0.05));
}

TEST_CASE("harmonic inversion: empty band, scale invariance and preconditions")
{
    const double dt = 0.05;
    const auto s = damped(1 << 14, dt, 0.25, 2e3);
    CHECK(harmonic_inversion(s, dt, 0.0, 0.4, 0.45, 4).modes.empty());

    std::vector<double> scaled(s);
    for (double &v : scaled)
    {
        v *= 1e-7;
    }
    const auto a = harmonic_inversion(s, dt, 0.0, 0.2, 0.3, 2);
    const auto b = harmonic_inversion(scaled, dt, 0.0, 0.2, 0.3, 2);
    REQUIRE(!a.modes.empty());
    REQUIRE(!b.modes.empty());
    CHECK(b.modes[0].q == doctest::Approx(a.modes[0].q).epsilon(1e-6));
    CHECK(b.modes[0].freq == doctest::Approx(a.modes[0].freq).epsilon(1e-12));

    const std::vector<double> shortrec(s.begin(), s.begin() + 100);
    CHECK_THROWS_AS(harmonic_inversion(shortrec, dt, 0.0, 0.2, 0.3, 2), ConfigError);
    CHECK_THROWS_AS(harmonic_inversion(s, dt, 0.0, 0.3, 0.2, 2), ConfigError);

    fdtd::FieldRecord rec;
    rec.dt = dt;
    rec.samples = s;
    rec.start_step = static_cast<long>(s.size());
    CHECK_THROWS_AS(harmonic_inversion(rec, 0.2, 0.3, 2), ConfigError);
}

TEST_CASE("ringdown Q from an exact exponential")
{
    const double f = 0.25;
    const double q = 5000.0;
    std::vector<double> t(400);
    std::vector<double> u(400);
    for (std::size_t k = 0; k < t.size(); ++k)
    {
        t[k] = 100.0 + 50.0 * k;
        u[k] = 3.0 * std::exp(-two_pi * f * t[k] / q);
    }
    const RingdownFit fit = ringdown_q(t, u, f);
    CHECK(fit.q == doctest::Approx(q).epsilon(1e-3));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ringdown Q with 1% noise over 100 trials")
{
    const double f = 0.25;
    const double q = 5000.0;
    std::mt19937 rng(42);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> errors;
    for (int trial = 0; trial < 100; ++trial)
    {
        std::vector<double> t(400);
        std::vector<double> u(400);
        for (std::size_t k = 0; k < t.size(); ++k)
        {
            t[k] = 50.0 * k;
            u[k] = std::exp(-two_pi * f * t[k] / q) * (1.0 + noise(rng));
        }
        errors.push_back(std::abs(ringdown_q(t, u, f).q / q - 1.0));
    }
    CHECK(median(errors) < 0.02);
    CHECK(*std::max_element(errors.begin(), errors.end()) < 0.02);
}

TEST_CASE("ringdown refuses a beating energy series")
{
    const double f = 0.25;
    std::vector<double> t(400);
    std::vector<double> u(400);
    for (std::size_t k = 0; k < t.size(); ++k)
    {
        t[k] = 5.0 * k;
        // Two modes 0.002 apart: the energy beats with period 500.
        const double beat = std::cos(two_pi * 0.001 * t[k]);
        u[k] = std::exp(-t[k] / 3000.0) * (0.05 + beat * beat);
    }
    CHECK_THROWS_AS(ringdown_q(t, u, f), ComputeError);
}

TEST_CASE("ringdown from a field record and harmonic inversion agree")
{
    fdtd::FieldRecord rec;
    rec.dt = 0.05;
    rec.samples = damped(1 << 15, rec.dt, 0.25, 800.0);
    const RingdownFit rd = ringdown_q(rec, 0.25);
    const auto hi = harmonic_inversion(rec, 0.2, 0.3, 2);
    REQUIRE(!hi.modes.empty());
    CHECK(rd.q == doctest::Approx(800.0).epsilon(0.01));
    CHECK(std::abs(rd.q / hi.modes[0].q - 1.0) < 0.1);
}

TEST_CASE("mode volume of a flat field in a rectangle is its area")
{
    const DielectricGrid g = geometry::uniform_grid(40, 30, 10.0, 4.0, 100.0);
    fdtd::Snapshot s = blank_snapshot(g);
    for (int j = 5; j < 20; ++j)
    {
        for (int i = 8; i < 30; ++i)
        {
            s.ex[j * g.nx + i] = 0.6;
            s.ey[j * g.nx + i] = 0.8;
        }
    }
    const ModeVolumeResult v = mode_volume(s, g, 0.25);
    CHECK(v.area_nm2 == doctest::Approx(22.0 * 15.0 * 100.0).epsilon(1e-14));
    CHECK(v.valid);
    CHECK(v.index == doctest::Approx(2.0));
    CHECK(v.v_eff_material_2d == doctest::Approx(v.v_eff_air_2d * 4.0).epsilon(1e-14));
    const double lambda = 100.0 / 0.25;
    CHECK(v.v_eff_air_2d == doctest::Approx(v.area_nm2 / (lambda * lambda / 4.0)).epsilon(1e-14));
}

TEST_CASE("mode volume of cos*cos is L^2/4 and is amplitude invariant")
{
    const int n = 61;
    const double dx = 10.0;
    const double l = n * dx;
    const DielectricGrid g = geometry::uniform_grid(n, n, dx, 1.0, 100.0);
    fdtd::Snapshot s = blank_snapshot(g);
    for (int j = 0; j < n; ++j)
    {
        for (int i = 0; i < n; ++i)
        {
            s.ex[j * n + i] = std::cos(std::numbers::pi * g.cell_x_nm(i) / l) * std::cos(std::numbers::pi * g.cell_y_nm(j) / l);
        }
    }
    const ModeVolumeResult v = mode_volume(s, g, 0.25);
    CHECK(v.area_nm2 == doctest::Approx(l * l / 4.0).epsilon(1e-12));
    CHECK(v.peak_x_nm == doctest::Approx(0.0));
    CHECK(v.peak_y_nm == doctest::Approx(0.0));

    ModeVolumeOptions opt;
    opt.effective_height_nm = 200.0;
    opt.index = 3.4;
    for (double& e : s.ex)
    {
        e *= 123.0;
    }
    const ModeVolumeResult w = mode_volume(s, g, 0.25, opt);
    CHECK(w.area_nm2 == doctest::Approx(v.area_nm2).epsilon(1e-12));
    REQUIRE(w.v_eff_air_3d);
    REQUIRE(w.v_eff_material_3d);
    CHECK(*w.v_eff_material_3d == doctest::Approx(*w.v_eff_air_3d * std::pow(3.4, 3)).epsilon(1e-12));
}

TEST_CASE("mode volume flags a peak on the boundary")
{
    const DielectricGrid g = geometry::uniform_grid(20, 20, 10.0, 1.0, 100.0);
    fdtd::Snapshot s = blank_snapshot(g);
    s.ex[5] = 1.0;
    s.ex[10 * 20 + 10] = 0.5;
    CHECK(!mode_volume(s, g, 0.25).valid);
    CHECK_THROWS_AS(mode_volume(blank_snapshot(g), g, 0.25), ComputeError);
}

TEST_CASE("Fourier power obeys Parseval and Hermitian symmetry")
{
    const int nx = 24;
    const int ny = 18;
    std::mt19937 rng(3);
    std::normal_distribution<double> n01;
    std::vector<double> f(nx * ny);
    double energy = 0.0;
    for (double &v : f)
    {
        v = n01(rng);
        energy += v * v;
    }
    const FourierMap m = fourier_power(f, nx, ny, 0.1, 0.0);
    double sum = 0.0;
    for (double p : m.power)
    {
        CHECK(p >= 0.0);
        sum += p;
    }
    CHECK(sum / (nx * ny) == doctest::Approx(energy).epsilon(1e-10));
    for (int j = 0; j < ny; ++j)
    {
        for (int i = 0; i < nx; ++i)
        {
            const int mi = (nx - i) % nx;
            const int mj = (ny - j) % ny;
            CHECK(m.power[j * nx + i] == doctest::Approx(m.power[mj * nx + mi]).epsilon(1e-10));
        }
    }
    CHECK(m.kx[0] == 0.0);
    CHECK(m.kx[1] == doctest::Approx(1.0 / (nx * 0.1)));
}

TEST_CASE("light cone: DC field, far-out plane wave and mirror parity")
{
    const int n = 64;
    const DielectricGrid g = geometry::uniform_grid(n, n, 20.0, 1.0, 100.0);
    LightConeOptions opt;
    opt.taper_fraction = 0.0;

    fdtd::Snapshot dc = blank_snapshot(g);
    std::fill(dc.ex.begin(), dc.ex.end(), 2.0);
    const LightConeResult a = light_cone_fraction(dc, g, 0.25, 1.0, opt);
    CHECK(a.fraction == doctest::Approx(1.0));
    CHECK(a.dc_fraction == doctest::Approx(1.0));

    fdtd::Snapshot wave = blank_snapshot(g);
    const double k0 = 4.0 * 0.25; // cycles per a
    for (int j = 0; j < n; ++j)
    {
        for (int i = 0; i < n; ++i)
        {
            wave.ex[j * n + i] = std::sin(two_pi * k0 * g.cell_x_nm(i) / g.a_nm);
        }
    }
    opt.taper_fraction = 0.1;
    CHECK(light_cone_fraction(wave, g, 0.25, 1.0, opt).fraction < 0.05);

    // E_x odd in both x and y against E_x even in both.
    fdtd::Snapshot odd = blank_snapshot(g);
    fdtd::Snapshot even = blank_snapshot(g);
    for (int j = 0; j < n; ++j)
    {
        for (int i = 0; i < n; ++i)
        {
            const double x = g.cell_x_nm(i) / 300.0;
            const double y = g.cell_y_nm(j) / 300.0;
            const double env = std::exp(-x * x - y * y);
            odd.ex[j * n + i] = x * y * env * std::cos(3.0 * x);
            even.ex[j * n + i] = env * std::cos(3.0 * x);
        }
    }
    const LightConeResult o = light_cone_fraction(odd, g, 0.25, 1.0, opt);
    const LightConeResult e = light_cone_fraction(even, g, 0.25, 1.0, opt);
    CHECK(o.dc_fraction < 1e-20);
    CHECK(e.dc_fraction > 10.0 * o.dc_fraction);
    CHECK(o.fraction >= 0.0);
    CHECK(o.fraction <= 1.0);

    for (double &v : odd.ex)
    {
        v *= 1e5;
    }
    CHECK(light_cone_fraction(odd, g, 0.25, 1.0, opt).fraction == doctest::Approx(o.fraction).epsilon(1e-10));

    odd.band_lo = 0.28;
    odd.band_hi = 0.32;
    CHECK_THROWS_AS(light_cone_fraction(odd, g, 0.25, 1.0, opt), ConfigError);
}

TEST_CASE("envelope fit: exact Gaussian, Bloch-like product and isotropy")
{
    const DielectricGrid g = geometry::uniform_grid(200, 160, 25.0, 1.0, 300.0);
    auto make = [&](double sx, double sy, bool bloch) {
        std::vector<double> d(static_cast<std::size_t>(g.nx) * g.ny);
        for (int j = 0; j < g.ny; ++j)
        {
            for (int i = 0; i < g.nx; ++i)
            {
                const double x = g.cell_x_nm(i) - 100.0;
                const double y = g.cell_y_nm(j) + 50.0;
                double v = 5.0 * std::exp(-x * x / (2 * sx * sx) - y * y / (2 * sy * sy));
                if (bloch)
                {
                    const double c = std::cos(std::numbers::pi * x / g.a_nm) * std::cos(std::numbers::pi * y / g.a_nm);
                    v *= c * c;
                }
                d[static_cast<std::size_t>(j) * g.nx + i] = v;
            }
        }
        return d;
    };

    const EnvelopeFit exact = envelope_gaussian_fit(make(1000.0, 600.0, false), g);
    CHECK(exact.sigma_x_nm == doctest::Approx(1000.0).epsilon(1e-6));
    CHECK(exact.sigma_y_nm == doctest::Approx(600.0).epsilon(1e-6));
    CHECK(exact.center_x_nm == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(exact.center_y_nm == doctest::Approx(-50.0).epsilon(1e-6));
    CHECK(exact.r2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(!exact.poor_fit);

    const EnvelopeFit bloch = envelope_gaussian_fit(make(1000.0, 600.0, true), g);
    CHECK(bloch.sigma_x_nm == doctest::Approx(1000.0).epsilon(0.1));
    CHECK(bloch.sigma_y_nm == doctest::Approx(600.0).epsilon(0.1));

    const EnvelopeFit iso = envelope_gaussian_fit(make(700.0, 700.0, false), g);
    CHECK(iso.sigma_x_nm == doctest::Approx(iso.sigma_y_nm).epsilon(1e-6));

    std::vector<double> scaled = make(1000.0, 600.0, false);
    for (double &v : scaled)
    {
        v *= 1e-9;
    }
    CHECK(envelope_gaussian_fit(scaled, g).sigma_x_nm == doctest::Approx(exact.sigma_x_nm).epsilon(1e-6));
    CHECK_THROWS_AS(envelope_gaussian_fit(std::vector<double>(g.eps.size(), 0.0), g), ComputeError);
}

TEST_CASE("envelope fit flags noise as a poor fit")
{
    const DielectricGrid g = geometry::uniform_grid(80, 80, 25.0, 1.0, 300.0);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> d(g.eps.size());
    for (double &v : d)
    {
        v = u(rng);
    }
    const EnvelopeFit fit = envelope_gaussian_fit(d, g);
    CHECK(fit.r2 >= 0.0);
    CHECK(fit.r2 <= 1.0);
    CHECK(fit.poor_fit);
}
