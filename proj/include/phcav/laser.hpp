#pragma once

// Steady-state single-mode rate equations for an optically pumped cavity:
//
//   0 = eta P / (hbar w_p V_a) - N / tau - v_g g(N) S / V_a
//   0 = Gamma v_g g(N) S - S / tau_p + beta Gamma N V_a / tau_sp
//
// with 1/tau = 1/tau_sp + 1/tau_nr and tau_p = Q lambda0 / (2 pi c). N is a
// carrier density (cm^-3), S the photon number in the mode, P the peak
// external pump power. Pulsed pumping is treated quasi-statically at peak power.

#include <string>
#include <vector>

namespace phcav
{
class ConfigSection;
}

namespace phcav::laser
{

enum class GainModel
{
    logarithmic, ///< g0 ln(N / N_tr)
    linear       ///< a (N - N_tr)
};

struct RateEqnParams
{
    double q = 1e4;
    double lambda0_nm = 1298.5;
    double beta = 1e-2;
    double confinement = 0.2;
    double v_g_cm_s = 2.99792458e10 / 3.5;
    GainModel gain_model = GainModel::logarithmic;
    double g0_per_cm = 1500.0;     ///< logarithmic gain coefficient
    double diff_gain_cm2 = 5e-16;  ///< linear differential gain
    double n_tr_cm3 = 1.5e18;
    double tau_sp_s = 2e-9;
    double tau_nr_s = 1e-9; ///< may be +inf
    double v_active_cm3 = 21e-8 * 30e-7; ///< 21 um^2 spot x 30 nm of wells
    double eta_pump = 0.5;
    double lambda_pump_nm = 830.0;
    /// Pulse duty cycle; only used to convert average to peak pump power.
    double duty = 10.0 / 300.0;
    /// Highest carrier density the gain model is trusted at.
    double n_max_cm3 = 1e20;

    void validate() const;
    double tau_p_s() const;
    double tau_s() const; ///< total carrier lifetime
    double photon_energy_j() const;
    double pump_photon_energy_j() const;
};

/// Volume of a pumped spot: area x total well thickness.
double active_volume_cm3(double pump_area_um2, double thickness_nm);

/// Reads a [laser] section. Unset keys keep the defaults above; unknown keys are rejected.
RateEqnParams params_from_config(const ConfigSection &section);

/// Rate constants in a chosen time unit (seconds when time_unit_s = 1). The
/// solution is independent of the unit up to rounding.
struct RateModel
{
    double pump_rate_per_uW; ///< carriers / (cm^3 time) per uW of pump
    double inv_tau;
    double inv_tau_sp;
    double inv_tau_p;
    double confinement;
    double beta;
    double v_g; ///< cm / time
    GainModel gain_model;
    double g0;
    double diff_gain;
    double n_tr;
    double v_active;
    double n_max;

    static RateModel from(const RateEqnParams &p, double time_unit_s = 1.0);

    double gain(double n) const;
    /// Carrier density at which the modal gain Gamma v_g g equals `modal_gain`.
    double density_for_gain(double modal_gain) const;

    struct State
    {
        double n;
        double s;
        double residual; ///< largest relative residual of the two equations
    };
    State solve(double pump_uW) const;
};

struct SteadyStateSolution
{
    double pump_uW = 0.0;
    double n_cm3 = 0.0;
    double s_photons = 0.0;
    double emitted_arb = 0.0; ///< hbar w S / tau_p, in uW
    double residual = 0.0;
};

SteadyStateSolution steady_state(const RateEqnParams &params, double pump_uW);

struct LLPoint
{
    SteadyStateSolution solution;
    std::string error; ///< non-empty when this point failed
};

struct LLCurve
{
    std::vector<LLPoint> points;
    bool monotone = true;
    /// Log-log slope between consecutive successful points (size points - 1, NaN where undefined).
    std::vector<double> log_slope;
    /// Pump interval where the log-log slope is steepest: the lasing transition.
    double transition_lo_uW = 0.0;
    double transition_hi_uW = 0.0;
};

/// pump_grid must be ascending.
LLCurve ll_curve(const RateEqnParams &params, const std::vector<double> &pump_grid);

double threshold_density_cm3(const RateEqnParams &params);
/// Pump at which the modal gain reaches the cavity loss, with S -> 0+.
double threshold_uW(const RateEqnParams &params);
/// Pump that holds the carriers at transparency with no stimulated emission.
double transparency_pump_uW(const RateEqnParams &params);
/// N_tr / N_th.
double transparency_ratio(const RateEqnParams &params);

std::string to_string(GainModel g);

} // namespace phcav::laser
