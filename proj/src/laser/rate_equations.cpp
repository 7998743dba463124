#include "phcav/config.hpp"
#include "phcav/error.hpp"
#include "phcav/laser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace phcav::laser
{
namespace
{
constexpr double c_cm_s = 2.99792458e10;
constexpr double h_js = 6.62607015e-34;

void require(bool ok, const char *what)
{
    if (!ok)
    {
        throw ConfigError(std::string("laser parameters: ") + what);
    }
}
} // namespace

void RateEqnParams::validate() const
{
    require(q > 0.0 && std::isfinite(q), "q must be positive and finite");
    require(lambda0_nm > 0.0 && lambda_pump_nm > 0.0, "wavelengths must be positive");
    require(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
    require(confinement > 0.0 && confinement <= 1.0, "confinement must lie in (0, 1]");
    require(v_g_cm_s > 0.0 && v_g_cm_s <= c_cm_s, "group velocity must lie in (0, c]");
    require(g0_per_cm > 0.0 && diff_gain_cm2 > 0.0, "gain coefficients must be positive");
    require(n_tr_cm3 > 0.0, "n_tr_cm3 must be positive");
    require(tau_sp_s > 0.0 && tau_nr_s > 0.0, "lifetimes must be positive (tau_nr_s may be inf)");
    require(v_active_cm3 > 0.0, "active volume must be positive");
    require(eta_pump > 0.0 && eta_pump <= 1.0, "eta_pump must lie in (0, 1]");
    require(duty > 0.0 && duty <= 1.0, "duty must lie in (0, 1]");
    require(n_max_cm3 > n_tr_cm3, "n_max_cm3 must exceed n_tr_cm3");
}

double RateEqnParams::tau_p_s() const
{
    return q * lambda0_nm * 1e-7 / (2.0 * std::numbers::pi * c_cm_s);
}

double RateEqnParams::tau_s() const
{
    return 1.0 / (1.0 / tau_sp_s + 1.0 / tau_nr_s);
}

double RateEqnParams::photon_energy_j() const
{
    return h_js * c_cm_s / (lambda0_nm * 1e-7);
}

double RateEqnParams::pump_photon_energy_j() const
{
    return h_js * c_cm_s / (lambda_pump_nm * 1e-7);
}

double active_volume_cm3(double pump_area_um2, double thickness_nm)
{
    if (!(pump_area_um2 > 0.0) || !(thickness_nm > 0.0))
    {
        throw ConfigError("active volume: pump area and thickness must be positive");
    }
    return pump_area_um2 * 1e-8 * thickness_nm * 1e-7;
}

RateEqnParams params_from_config(const ConfigSection &s)
{
    s.require_known({"q", "lambda0_nm", "beta", "confinement", "group_index", "v_g_cm_s", "gain_model", "g0_per_cm",
                     "diff_gain_cm2", "n_tr_cm3", "tau_sp_s", "tau_nr_s", "v_active_cm3", "pump_area_um2",
                     "active_thickness_nm", "eta_pump", "lambda_pump_nm", "duty", "n_max_cm3"});
    RateEqnParams p;
    p.q = s.get_double("q", p.q);
    p.lambda0_nm = s.get_double("lambda0_nm", p.lambda0_nm);
    p.beta = s.get_double("beta", p.beta);
    p.confinement = s.get_double("confinement", p.confinement);
    if (s.has("group_index") && s.has("v_g_cm_s"))
    {
        throw ConfigError("laser: set either group_index or v_g_cm_s, not both");
    }
    if (s.has("group_index"))
    {
        const double ng = s.get_double("group_index");
        require(ng >= 1.0, "group_index must be >= 1");
        p.v_g_cm_s = c_cm_s / ng;
    }
    p.v_g_cm_s = s.get_double("v_g_cm_s", p.v_g_cm_s);
    const std::string model = s.get_string("gain_model", "logarithmic");
    if (model == "logarithmic")
    {
        p.gain_model = GainModel::logarithmic;
    }
    else if (model == "linear")
    {
        p.gain_model = GainModel::linear;
    }
    else
    {
        throw ConfigError("laser.gain_model must be 'logarithmic' or 'linear', got '" + model + "'");
    }
    p.g0_per_cm = s.get_double("g0_per_cm", p.g0_per_cm);
    p.diff_gain_cm2 = s.get_double("diff_gain_cm2", p.diff_gain_cm2);
    p.n_tr_cm3 = s.get_double("n_tr_cm3", p.n_tr_cm3);
    p.tau_sp_s = s.get_double("tau_sp_s", p.tau_sp_s);
    p.tau_nr_s = s.get_double("tau_nr_s", p.tau_nr_s);
    if (s.has("v_active_cm3") && (s.has("pump_area_um2") || s.has("active_thickness_nm")))
    {
        throw ConfigError("laser: set either v_active_cm3 or pump_area_um2 with active_thickness_nm, not both");
    }
    if (s.has("pump_area_um2") || s.has("active_thickness_nm"))
    {
        p.v_active_cm3 = active_volume_cm3(s.get_double("pump_area_um2", 21.0), s.get_double("active_thickness_nm", 30.0));
    }
    p.v_active_cm3 = s.get_double("v_active_cm3", p.v_active_cm3);
    p.eta_pump = s.get_double("eta_pump", p.eta_pump);
    p.lambda_pump_nm = s.get_double("lambda_pump_nm", p.lambda_pump_nm);
    p.duty = s.get_double("duty", p.duty);
    p.n_max_cm3 = s.get_double("n_max_cm3", p.n_max_cm3);
    p.validate();
    return p;
}

RateModel RateModel::from(const RateEqnParams &p, double time_unit_s)
{
    p.validate();
    if (!(time_unit_s > 0.0))
    {
        throw ConfigError("RateModel: time unit must be positive");
    }
    RateModel m{};
    m.pump_rate_per_uW = p.eta_pump * 1e-6 / (p.pump_photon_energy_j() * p.v_active_cm3) * time_unit_s;
    m.inv_tau = time_unit_s / p.tau_s();
    m.inv_tau_sp = time_unit_s / p.tau_sp_s;
    m.inv_tau_p = time_unit_s / p.tau_p_s();
    m.confinement = p.confinement;
    m.beta = p.beta;
    m.v_g = p.v_g_cm_s * time_unit_s;
    m.gain_model = p.gain_model;
    m.g0 = p.g0_per_cm;
    m.diff_gain = p.diff_gain_cm2;
    m.n_tr = p.n_tr_cm3;
    m.v_active = p.v_active_cm3;
    m.n_max = p.n_max_cm3;
    return m;
}

double RateModel::gain(double n) const
{
    if (gain_model == GainModel::logarithmic)
    {
        return g0 * std::log(n / n_tr);
    }
    return diff_gain * (n - n_tr);
}

double RateModel::density_for_gain(double modal_gain) const
{
    const double g = modal_gain / (confinement * v_g);
    if (gain_model == GainModel::logarithmic)
    {
        return n_tr * std::exp(g / g0);
    }
    return std::max(0.0, n_tr + g / diff_gain);
}

RateModel::State RateModel::solve(double pump_uW) const
{
    if (!(pump_uW >= 0.0) || !std::isfinite(pump_uW))
    {
        throw ConfigError("steady_state: pump power must be finite and non-negative");
    }
    if (pump_uW == 0.0)
    {
        return {0.0, 0.0, 0.0};
    }
    const double rp = pump_rate_per_uW * pump_uW;

    // Unknown: t = ln D with D = 1/tau_p - Gamma v_g g(N) > 0, so S >= 0 holds by
    // construction and the steep approach to gain clamping stays resolved.
    auto state = [&](double t, double &n, double &s) {
        const double d = std::exp(t);
        n = density_for_gain(inv_tau_p - d);
        s = beta * confinement * n * v_active * inv_tau_sp / d;
        return n * inv_tau + v_g * gain(n) * s / v_active - rp;
    };
    auto carrier_terms = [&](double n, double s) {
        return std::max({rp, n * inv_tau, std::abs(v_g * gain(n) * s / v_active)});
    };

    double t_hi = 0.0;
    if (gain_model == GainModel::logarithmic)
    {
        const double n_small = std::min(n_tr, rp / inv_tau) * 1e-12;
        t_hi = std::log(inv_tau_p - confinement * v_g * g0 * std::log(n_small / n_tr));
    }
    else
    {
        t_hi = std::log(inv_tau_p + confinement * v_g * diff_gain * n_tr);
    }
    double t_lo = std::log(inv_tau_p) - 600.0;
    double n = 0.0, s = 0.0;
    double f_hi = state(t_hi, n, s);
    double f_lo = state(t_lo, n, s);
    if (!(f_hi < 0.0) || !(f_lo > 0.0) || !std::isfinite(f_lo))
    {
        std::ostringstream msg;
        msg << "steady_state: no bracket at P = " << pump_uW << " uW (modal gain at N -> 0: "
            << confinement * v_g * gain(std::max(n_tr * 1e-12, 1.0)) << ", cavity loss 1/tau_p = " << inv_tau_p << ")";
        throw ComputeError(msg.str());
    }

    // Newton on t with a secant slope, falling back to bisection whenever the
    // step leaves the bracket.
    double t = 0.5 * (t_lo + t_hi);
    double f = state(t, n, s);
    double t_prev = t_hi, f_prev = f_hi;
    for (int it = 0; it < 400; ++it)
    {
        if (f > 0.0)
        {
            t_lo = t;
            f_lo = f;
        }
        else
        {
            t_hi = t;
            f_hi = f;
        }
        if (f == 0.0 || t_hi - t_lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
        {
            break;
        }
        double next = 0.5 * (t_lo + t_hi);
        if (f != f_prev)
        {
            const double newton = t - f * (t - t_prev) / (f - f_prev);
            if (newton > t_lo && newton < t_hi)
            {
                next = newton;
            }
        }
        t_prev = t;
        f_prev = f;
        t = next;
        f = state(t, n, s);
    }

    const double gain_term = confinement * v_g * gain(n) * s;
    const double photon_scale = std::max({std::abs(gain_term), s * inv_tau_p, beta * confinement * n * v_active * inv_tau_sp});
    const double r_photon = (gain_term - s * inv_tau_p + beta * confinement * n * v_active * inv_tau_sp) / photon_scale;
    const double r_carrier = (rp - n * inv_tau - v_g * gain(n) * s / v_active) / carrier_terms(n, s);
    return {n, s, std::max(std::abs(r_photon), std::abs(r_carrier))};
}

SteadyStateSolution steady_state(const RateEqnParams &params, double pump_uW)
{
    const auto model = RateModel::from(params);
    const auto st = model.solve(pump_uW);
    if (st.residual > 1e-10)
    {
        std::ostringstream msg;
        msg << "steady_state: residual " << st.residual << " above 1e-10 at P = " << pump_uW << " uW";
        throw ComputeError(msg.str());
    }
    SteadyStateSolution out;
    out.pump_uW = pump_uW;
    out.n_cm3 = st.n;
    out.s_photons = st.s;
    out.emitted_arb = params.photon_energy_j() * st.s / params.tau_p_s() * 1e6;
    out.residual = st.residual;
    return out;
}

LLCurve ll_curve(const RateEqnParams &params, const std::vector<double> &pump_grid)
{
    if (!std::is_sorted(pump_grid.begin(), pump_grid.end()))
    {
        throw ConfigError("ll_curve: pump grid must be ascending");
    }
    params.validate();
    LLCurve curve;
    curve.points.resize(pump_grid.size());
    for (std::size_t k = 0; k < pump_grid.size(); ++k)
    {
        try
        {
            curve.points[k].solution = steady_state(params, pump_grid[k]);
        }
        catch (const std::exception &e)
        {
            curve.points[k].solution.pump_uW = pump_grid[k];
            curve.points[k].error = e.what();
        }
    }
    double best = -INFINITY;
    for (std::size_t k = 1; k < curve.points.size(); ++k)
    {
        const auto &a = curve.points[k - 1];
        const auto &b = curve.points[k];
        double slope = NAN;
        if (a.error.empty() && b.error.empty())
        {
            if (b.solution.s_photons <= a.solution.s_photons && b.solution.pump_uW > a.solution.pump_uW)
            {
                curve.monotone = false;
            }
            if (a.solution.pump_uW > 0.0 && b.solution.pump_uW > a.solution.pump_uW && a.solution.s_photons > 0.0)
            {
                slope = std::log(b.solution.s_photons / a.solution.s_photons) /
                        std::log(b.solution.pump_uW / a.solution.pump_uW);
            }
        }
        curve.log_slope.push_back(slope);
        if (std::isfinite(slope) && slope > best)
        {
            best = slope;
            curve.transition_lo_uW = a.solution.pump_uW;
            curve.transition_hi_uW = b.solution.pump_uW;
        }
    }
    return curve;
}

double threshold_density_cm3(const RateEqnParams &params)
{
    const auto m = RateModel::from(params);
    const double n_th = m.density_for_gain(m.inv_tau_p);
    if (!(n_th <= m.n_max) || !std::isfinite(n_th))
    {
        std::ostringstream msg;
        msg << "cavity loss exceeds material gain: threshold density " << n_th << " cm^-3 is above n_max_cm3 = "
            << m.n_max;
        throw ComputeError(msg.str());
    }
    return n_th;
}

double threshold_uW(const RateEqnParams &params)
{
    const double n_th = threshold_density_cm3(params);
    return n_th / params.tau_s() * params.v_active_cm3 * params.pump_photon_energy_j() / params.eta_pump * 1e6;
}

double transparency_pump_uW(const RateEqnParams &params)
{
    params.validate();
    return params.n_tr_cm3 / params.tau_s() * params.v_active_cm3 * params.pump_photon_energy_j() / params.eta_pump *
           1e6;
}

double transparency_ratio(const RateEqnParams &params)
{
    return params.n_tr_cm3 / threshold_density_cm3(params);
}

std::string to_string(GainModel g)
{
    return g == GainModel::logarithmic ? "logarithmic" : "linear";
}

} // namespace phcav::laser
