#include "phcav/cli.hpp"
#include "phcav/error.hpp"
#include "phcav/laser.hpp"
#include "phcav/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phcav::cli
{
namespace fs = std::filesystem;
using io::json;

namespace
{
json num(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

bool has_column(const io::Table &t, const std::string &name)
{
    return std::find(t.header.begin(), t.header.end(), name) != t.header.end();
}

io::Table read_table(Context &ctx, const fs::path &p)
{
    ctx.note_read(p);
    return io::read_csv(p);
}

json params_json(const laser::RateEqnParams &p)
{
    return {{"q", p.q},
            {"lambda0_nm", p.lambda0_nm},
            {"beta", p.beta},
            {"confinement", p.confinement},
            {"v_g_cm_s", p.v_g_cm_s},
            {"gain_model", laser::to_string(p.gain_model)},
            {"g0_per_cm", p.g0_per_cm},
            {"diff_gain_cm2", p.diff_gain_cm2},
            {"n_tr_cm3", p.n_tr_cm3},
            {"tau_sp_s", p.tau_sp_s},
            {"tau_nr_s", num(p.tau_nr_s)},
            {"v_active_cm3", p.v_active_cm3},
            {"eta_pump", p.eta_pump},
            {"lambda_pump_nm", p.lambda_pump_nm},
            {"duty", p.duty},
            {"n_max_cm3", p.n_max_cm3},
            {"tau_p_s", p.tau_p_s()}};
}

std::vector<double> pump_grid(const ConfigSection &s, double p_th)
{
    s.require_known({"pump_uW", "pump_min_uW", "pump_max_uW", "points", "spacing"});
    const double lo = s.get_double("pump_min_uW", 0.01 * p_th);
    const double hi = s.get_double("pump_max_uW", 10.0 * p_th);
    const long n = s.get_int("points", 30);
    const std::string spacing = s.get_string("spacing", "log");
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
    {
        throw ConfigError("pump grid needs 0 < pump_min_uW < pump_max_uW and points >= 2");
    }
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k)
    {
        const double u = static_cast<double>(k) / static_cast<double>(n - 1);
        if (spacing == "log")
        {
            grid[k] = lo * std::pow(hi / lo, u);
        }
        else if (spacing == "linear")
        {
            grid[k] = lo + (hi - lo) * u;
        }
        else
        {
            throw ConfigError("pump.spacing must be 'log' or 'linear', got '" + spacing + "'");
        }
    }
    grid.back() = hi;
    return grid;
}

json line_json(const spectra::LineFit &l)
{
    return {{"slope_arb_per_uW", l.slope}, {"intercept_arb", l.intercept}};
}

spectra::ThresholdSignal signal_from(const std::string &s)
{
    if (s == "line")
    {
        return spectra::ThresholdSignal::line;
    }
    if (s == "background")
    {
        return spectra::ThresholdSignal::background;
    }
    throw ConfigError("fit.signal must be 'line' or 'background', got '" + s + "'");
}
} // namespace

void cmd_laser(Context &ctx, const std::string &which)
{
    const Config &cfg = ctx.cfg();
    cfg.require_sections({"laser", "pump"});
    const laser::RateEqnParams params = laser::params_from_config(cfg.section("laser"));
    const ConfigSection &pump = ctx.section_or_empty("pump");
    const double p_th = laser::threshold_uW(params);

    if (which == "threshold")
    {
        pump.require_known({"pump_uW", "pump_min_uW", "pump_max_uW", "points", "spacing"});
        const double p_tr = laser::transparency_pump_uW(params);
        json report = {{"threshold_uW", p_th},
                       {"threshold_average_uW", p_th * params.duty},
                       {"threshold_density_cm3", laser::threshold_density_cm3(params)},
                       {"transparency_pump_uW", p_tr},
                       {"transparency_ratio", laser::transparency_ratio(params)},
                       {"pump_convention", "peak power; average = peak x duty"},
                       {"params", params_json(params)}};
        ctx.emit_json("threshold.json", report);
        *ctx.out << report.dump(2) << '\n';
    }
    else if (which == "steady")
    {
        pump.require_known({"pump_uW", "pump_min_uW", "pump_max_uW", "points", "spacing"});
        const double p = pump.get_double("pump_uW");
        const auto s = laser::steady_state(params, p);
        json report = {{"pump_uW", s.pump_uW},
                       {"n_cm3", s.n_cm3},
                       {"s_photons", s.s_photons},
                       {"emitted_uW", s.emitted_arb},
                       {"residual", s.residual},
                       {"threshold_uW", p_th},
                       {"params", params_json(params)}};
        ctx.emit_json("steady.json", report);
        *ctx.out << report.dump(2) << '\n';
    }
    else if (which == "ll")
    {
        const auto grid = pump_grid(pump, p_th);
        const auto curve = laser::ll_curve(params, grid);
        io::Table t;
        t.header = {"pump_uW", "N_cm3", "S_photons", "emitted_arb"};
        t.columns.resize(4);
        json failures = json::array();
        for (const auto &pt : curve.points)
        {
            if (!pt.error.empty())
            {
                failures.push_back({{"pump_uW", pt.solution.pump_uW}, {"error", pt.error}});
                continue;
            }
            t.columns[0].push_back(pt.solution.pump_uW);
            t.columns[1].push_back(pt.solution.n_cm3);
            t.columns[2].push_back(pt.solution.s_photons);
            t.columns[3].push_back(pt.solution.emitted_arb);
        }
        ctx.emit_csv("ll.csv", t);
        json report = {{"points", grid.size()},
                       {"failed_points", failures},
                       {"monotone", curve.monotone},
                       {"transition_lo_uW", curve.transition_lo_uW},
                       {"transition_hi_uW", curve.transition_hi_uW},
                       {"threshold_uW", p_th},
                       {"params", params_json(params)}};
        ctx.emit_json("ll.json", report);
        *ctx.out << report.dump(2) << '\n';
        if (!failures.empty())
        {
            throw ComputeError("laser ll: " + std::to_string(failures.size()) + " pump point(s) did not converge");
        }
    }
    else
    {
        throw ConfigError("unknown laser subcommand '" + which + "'");
    }
}

void cmd_fit(Context &ctx, const std::string &which)
{
    if (ctx.config)
    {
        ctx.config->require_sections({"fit", "overlap"});
    }
    const ConfigSection &f = ctx.section_or_empty("fit");

    if (which == "lorentzian")
    {
        f.require_known({"lo_nm", "hi_nm", "resolution_nm", "half_window", "asymmetry_limit", "max_evaluations"});
        const io::Table t = read_table(ctx, ctx.input());
        spectra::Spectrum s;
        s.wavelength_nm = t.column("wavelength_nm");
        s.power = t.column("power_arb");
        s.resolution_nm = f.get_double("resolution_nm", 0.0);
        spectra::LorentzianOptions opt;
        const std::string hw = f.get_string("half_window", "auto");
        if (hw == "auto")
        {
            opt.half_window = spectra::HalfWindow::automatic;
        }
        else if (hw == "off")
        {
            opt.half_window = spectra::HalfWindow::off;
        }
        else if (hw == "long_side")
        {
            opt.half_window = spectra::HalfWindow::long_side;
        }
        else
        {
            throw ConfigError("fit.half_window must be 'auto', 'off' or 'long_side', got '" + hw + "'");
        }
        opt.asymmetry_limit = f.get_double("asymmetry_limit", opt.asymmetry_limit);
        opt.max_evaluations = static_cast<int>(f.get_int("max_evaluations", opt.max_evaluations));
        const auto [lo_it, hi_it] = std::minmax_element(s.wavelength_nm.begin(), s.wavelength_nm.end());
        const double lo = f.get_double("lo_nm", s.wavelength_nm.empty() ? 0.0 : *lo_it);
        const double hi = f.get_double("hi_nm", s.wavelength_nm.empty() ? 0.0 : *hi_it);
        const auto r = spectra::fit_lorentzian(s, lo, hi, opt);
        json report = {{"lambda0_nm", r.lambda0_nm},
                       {"fwhm_nm", r.fwhm_nm},
                       {"q_loaded", r.q_loaded},
                       {"amplitude_arb", r.amplitude},
                       {"offset_arb", r.offset},
                       {"residual_rms_arb", r.residual},
                       {"samples", r.samples},
                       {"asymmetric", r.asymmetric},
                       {"resolution_nm", s.resolution_nm},
                       {"resolution_limited", r.resolution_limited},
                       {"fwhm_corrected_nm", r.fwhm_corrected_nm},
                       {"q_corrected", num(r.q_corrected)}};
        ctx.emit_json("lorentzian.json", report);
        *ctx.out << report.dump(2) << '\n';
    }
    else if (which == "threshold")
    {
        f.require_known({"signal"});
        const io::Table t = read_table(ctx, ctx.input());
        spectra::LLData d;
        d.pump_uW = t.column("pump_uW");
        d.line_power = t.column("line_arb");
        if (has_column(t, "background_arb"))
        {
            d.background_power = t.column("background_arb");
        }
        const auto sig = signal_from(f.get_string("signal", "line"));
        const auto r = spectra::fit_threshold(d, sig);
        json report = {{"signal", f.get_string("signal", "line")},
                       {"threshold_uW", r.p_threshold_uW},
                       {"below", line_json(r.below)},
                       {"above", line_json(r.above)},
                       {"below_rows", {r.below_range.first, r.below_range.second}},
                       {"above_rows", {r.above_range.first, r.above_range.second}},
                       {"sse", r.sse},
                       {"sse_single_line", r.sse_single_line}};
        ctx.emit_json("threshold_fit.json", report);
        *ctx.out << report.dump(2) << '\n';
    }
    else if (which == "polarization")
    {
        f.require_known({});
        const io::Table t = read_table(ctx, ctx.input());
        std::vector<double> theta = t.column("angle_deg");
        for (double &v : theta)
        {
            v *= std::numbers::pi / 180.0;
        }
        const auto r = spectra::polarization_fit(theta, t.column("power_arb"));
        json report = {{"p_max_arb", r.p_max},
                       {"p_min_arb", r.p_min},
                       {"theta0_deg", r.theta0_rad * 180.0 / std::numbers::pi},
                       {"extinction_ratio", num(r.extinction_ratio)},
                       {"residual_rms_arb", r.residual},
                       {"p_min_clamped", r.p_min_clamped},
                       {"theta_undetermined", r.theta_undetermined}};
        ctx.emit_json("polarization.json", report);
        *ctx.out << report.dump(2) << '\n';
    }
    else if (which == "overlap")
    {
        f.require_known({});
        const ConfigSection &o = ctx.section_or_empty("overlap");
        o.require_known({"beam_sigma_nm", "pump_area_um2"});
        if (!ctx.envelope)
        {
            throw ConfigError("fit overlap needs --envelope (an envelope.json from 'modes envelope')");
        }
        ctx.note_read(*ctx.envelope);
        const json env_doc = io::read_json(*ctx.envelope);
        modes::EnvelopeFit env;
        try
        {
            env.sigma_x_nm = env_doc.at("sigma_x_nm").get<double>();
            env.sigma_y_nm = env_doc.at("sigma_y_nm").get<double>();
            env.center_x_nm = env_doc.at("center_x_nm").get<double>();
            env.center_y_nm = env_doc.at("center_y_nm").get<double>();
        }
        catch (const json::exception &)
        {
            throw ConfigError("'" + ctx.envelope->string() + "' lacks sigma_x_nm, sigma_y_nm, center_x_nm or center_y_nm");
        }
        double sigma = 0.0;
        if (o.has("beam_sigma_nm") == o.has("pump_area_um2"))
        {
            throw ConfigError("[overlap] needs exactly one of beam_sigma_nm and pump_area_um2");
        }
        sigma = o.has("beam_sigma_nm") ? o.get_double("beam_sigma_nm")
                                       : spectra::beam_sigma_from_area_nm(o.get_double("pump_area_um2"));
        const io::Table t = read_table(ctx, ctx.input());
        const auto &xs = t.column("x_nm");
        const auto &ys = t.column("y_nm");
        std::vector<spectra::PumpPosition> pos;
        for (std::size_t k = 0; k < xs.size(); ++k)
        {
            pos.push_back({xs[k], ys[k]});
        }
        const auto rel = spectra::pump_overlap_scan(env, sigma, pos);
        io::Table out;
        out.header = {"x_nm", "y_nm", "relative_power"};
        out.columns = {xs, ys, rel};
        ctx.emit_csv("overlap.csv", out);
        json report = {{"beam_sigma_nm", sigma},
                       {"envelope_sigma_x_nm", env.sigma_x_nm},
                       {"envelope_sigma_y_nm", env.sigma_y_nm},
                       {"positions", pos.size()}};
        ctx.emit_json("overlap.json", report);
        *ctx.out << report.dump(2) << '\n';
    }
    else
    {
        throw ConfigError("unknown fit subcommand '" + which + "'");
    }
}

} // namespace phcav::cli
