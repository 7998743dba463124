#include "phcav/cli.hpp"
#include "phcav/error.hpp"
#include "phcav/fdtd.hpp"
#include "phcav/geometry.hpp"
#include "phcav/modes.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

namespace phcav::cli
{
namespace fs = std::filesystem;
using io::json;

// ---------------------------------------------------------------------------
// Context helpers

const Config &Context::cfg() const
{
    if (!config)
    {
        throw ConfigError("this command needs --config");
    }
    return *config;
}

const ConfigSection &Context::section_or_empty(std::string_view name) const
{
    static const ConfigSection empty("", 0);
    if (config)
    {
        if (const auto *s = config->find(name))
        {
            return *s;
        }
    }
    return empty;
}

const fs::path &Context::input(std::size_t k) const
{
    if (k >= inputs.size())
    {
        throw ConfigError("this command needs --input");
    }
    return inputs[k];
}

fs::path Context::output(const std::string &name)
{
    fs::create_directories(out_dir);
    if (std::find(written.begin(), written.end(), name) == written.end())
    {
        written.push_back(name);
    }
    return out_dir / name;
}

void Context::emit_json(const std::string &name, const json &doc)
{
    io::write_json(output(name), doc);
}

void Context::emit_csv(const std::string &name, const io::Table &table)
{
    io::write_csv(output(name), table);
}

void Context::note_read(const fs::path &p)
{
    if (std::find(read_files.begin(), read_files.end(), p) == read_files.end())
    {
        read_files.push_back(p);
    }
}

void Context::log(const std::string &message) const
{
    if (verbose && err)
    {
        *err << message << '\n';
    }
}

namespace
{
// JSON has no inf / nan; such values are written as null.
json num(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

// ---------------------------------------------------------------------------
// Grid and snapshot files

json grid_sidecar(const geometry::DielectricGrid &g, const std::string &data_file)
{
    return {{"data", data_file},
            {"layout", "float64 little-endian, row-major, row = y"},
            {"nx", g.nx},
            {"ny", g.ny},
            {"dx_nm", g.dx_nm},
            {"origin_x_nm", g.origin_x_nm},
            {"origin_y_nm", g.origin_y_nm},
            {"width_nm", g.width_nm()},
            {"height_nm", g.height_nm()},
            {"n_eff", g.n_eff},
            {"a_nm", g.a_nm},
            {"spec_digest", g.spec_digest}};
}

void write_grid(Context &ctx, const geometry::DielectricGrid &g, const std::string &stem)
{
    io::write_f64(ctx.output(stem + ".f64"), g.eps);
    ctx.emit_json(stem + ".json", grid_sidecar(g, stem + ".f64"));
}

template <typename T> T field(const json &doc, const char *key, const fs::path &from)
{
    if (!doc.contains(key))
    {
        throw ConfigError("'" + from.string() + "' lacks the field '" + key + "'");
    }
    return doc.at(key).get<T>();
}

geometry::DielectricGrid read_grid(Context &ctx, const fs::path &sidecar)
{
    ctx.note_read(sidecar);
    const json doc = io::read_json(sidecar);
    geometry::DielectricGrid g;
    g.nx = field<int>(doc, "nx", sidecar);
    g.ny = field<int>(doc, "ny", sidecar);
    g.dx_nm = field<double>(doc, "dx_nm", sidecar);
    g.origin_x_nm = field<double>(doc, "origin_x_nm", sidecar);
    g.origin_y_nm = field<double>(doc, "origin_y_nm", sidecar);
    g.n_eff = field<double>(doc, "n_eff", sidecar);
    g.a_nm = field<double>(doc, "a_nm", sidecar);
    g.spec_digest = doc.value("spec_digest", "");
    const fs::path data = sidecar.parent_path() / field<std::string>(doc, "data", sidecar);
    ctx.note_read(data);
    g.eps = io::read_f64(data);
    if (g.nx < 1 || g.ny < 1 || g.eps.size() != static_cast<std::size_t>(g.nx) * g.ny)
    {
        throw ConfigError("'" + data.string() + "' does not hold nx * ny values");
    }
    return g;
}

std::string snapshot_stem(std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%04zu", k);
    return buf;
}

void write_snapshot(Context &ctx, const fdtd::Snapshot &s, std::size_t k, const std::string &grid_sidecar_name)
{
    const std::string stem = snapshot_stem(k);
    json fields = json::object();
    for (auto c : {fdtd::Component::Hz, fdtd::Component::Ex, fdtd::Component::Ey})
    {
        const std::string name = stem + "_" + fdtd::to_string(c) + ".f64";
        io::write_f64(ctx.output(name), s.component(c));
        fields[fdtd::to_string(c)] = name;
    }
    ctx.emit_json(stem + ".json", {{"step", s.step},
                                   {"time_norm", s.time},
                                   {"nx", s.nx},
                                   {"ny", s.ny},
                                   {"unfolded", s.unfolded},
                                   {"symmetry_x", fdtd::to_string(s.symmetry_x)},
                                   {"symmetry_y", fdtd::to_string(s.symmetry_y)},
                                   {"band_lo_norm", s.band_lo},
                                   {"band_hi_norm", s.band_hi},
                                   {"grid", grid_sidecar_name},
                                   {"fields", fields}});
}

struct LoadedSnapshot
{
    fdtd::Snapshot snapshot;
    geometry::DielectricGrid grid;
};

LoadedSnapshot read_snapshot(Context &ctx, const fs::path &sidecar)
{
    ctx.note_read(sidecar);
    const json doc = io::read_json(sidecar);
    LoadedSnapshot out;
    out.grid = read_grid(ctx, sidecar.parent_path() / field<std::string>(doc, "grid", sidecar));
    auto &s = out.snapshot;
    s.step = doc.value("step", 0L);
    s.time = doc.value("time_norm", 0.0);
    s.nx = field<int>(doc, "nx", sidecar);
    s.ny = field<int>(doc, "ny", sidecar);
    s.unfolded = doc.value("unfolded", false);
    s.symmetry_x = fdtd::symmetry_from_string(doc.value("symmetry_x", "none"));
    s.symmetry_y = fdtd::symmetry_from_string(doc.value("symmetry_y", "none"));
    s.band_lo = doc.value("band_lo_norm", 0.0);
    s.band_hi = doc.value("band_hi_norm", 0.0);
    const json &fields = doc.at("fields");
    const std::size_t n = static_cast<std::size_t>(s.nx) * s.ny;
    for (auto c : {fdtd::Component::Hz, fdtd::Component::Ex, fdtd::Component::Ey})
    {
        const std::string key = fdtd::to_string(c);
        std::vector<double> values(n, 0.0);
        if (fields.contains(key))
        {
            const fs::path p = sidecar.parent_path() / fields.at(key).get<std::string>();
            ctx.note_read(p);
            values = io::read_f64(p);
            if (values.size() != n)
            {
                throw ConfigError("'" + p.string() + "' does not hold nx * ny values");
            }
        }
        (c == fdtd::Component::Hz ? s.hz : c == fdtd::Component::Ex ? s.ex : s.ey) = std::move(values);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config to geometry

geometry::RasterOptions raster_options(const Config &cfg, const geometry::LatticeSpec &spec,
                                       std::optional<std::size_t> max_mem)
{
    geometry::RasterOptions opt;
    opt.dx_nm = spec.a_nm / 20.0;
    opt.padding_nm = 3.0 * spec.a_nm;
    if (const auto *r = cfg.find("raster"))
    {
        r->require_known({"dx_nm", "smoothing", "padding_nm", "subsamples"});
        opt.dx_nm = r->get_double("dx_nm", opt.dx_nm);
        opt.padding_nm = r->get_double("padding_nm", opt.padding_nm);
        opt.subsamples = static_cast<int>(r->get_int("subsamples", opt.subsamples));
        const std::string sm = r->get_string("smoothing", "area_average");
        if (sm == "area_average")
        {
            opt.smoothing = geometry::Smoothing::area_average;
        }
        else if (sm == "staircase")
        {
            opt.smoothing = geometry::Smoothing::staircase;
        }
        else
        {
            throw ConfigError("raster.smoothing must be 'area_average' or 'staircase', got '" + sm + "'");
        }
    }
    if (max_mem)
    {
        opt.max_bytes = *max_mem;
    }
    return opt;
}

struct BuiltGrid
{
    geometry::DielectricGrid grid;
    std::optional<geometry::LatticeSpec> spec;
    geometry::HoleList holes;
};

BuiltGrid grid_from_config(const Config &cfg, std::optional<std::size_t> max_mem)
{
    BuiltGrid out;
    if (const auto *lat = cfg.find("lattice"))
    {
        if (cfg.find("domain"))
        {
            throw ConfigError("config has both [lattice] and [domain]; pick one");
        }
        out.spec = geometry::lattice_spec_from_config(*lat);
        out.holes = geometry::build_graded_lattice(*out.spec);
        out.grid = geometry::rasterize(out.holes, *out.spec, raster_options(cfg, *out.spec, max_mem));
        return out;
    }
    if (const auto *d = cfg.find("domain"))
    {
        d->require_known({"nx", "ny", "dx_nm", "eps", "a_nm"});
        const long nx = d->get_int("nx");
        const long ny = d->get_int("ny");
        if (nx < 2 || ny < 2 || nx > 1L << 15 || ny > 1L << 15)
        {
            throw ConfigError("domain.nx and domain.ny must lie in [2, 32768]");
        }
        const double bytes = static_cast<double>(nx) * static_cast<double>(ny) * sizeof(double);
        if (max_mem && bytes > static_cast<double>(*max_mem))
        {
            throw ConfigError("domain grid needs " + std::to_string(bytes / 1048576.0) + " MB, above --max-mem");
        }
        out.grid = geometry::uniform_grid(static_cast<int>(nx), static_cast<int>(ny), d->get_double("dx_nm"),
                                          d->get_double("eps", 1.0), d->get_double("a_nm"));
        return out;
    }
    throw ConfigError("config needs a [lattice] or a [domain] section");
}

json lattice_summary(const geometry::LatticeSpec &spec, const geometry::HoleList &holes,
                     const geometry::DielectricGrid &grid)
{
    double r_lo = INFINITY, r_hi = 0.0;
    for (const auto &h : holes.holes)
    {
        r_lo = std::min(r_lo, h.r_nm);
        r_hi = std::max(r_hi, h.r_nm);
    }
    return {{"rows", spec.n_rows},
            {"cols", spec.n_cols},
            {"holes", holes.holes.size()},
            {"a_nm", spec.a_nm},
            {"footprint_width_nm", holes.footprint_width_nm},
            {"footprint_height_nm", holes.footprint_height_nm},
            {"r_min_nm", num(r_lo)},
            {"r_max_nm", r_hi},
            {"r_bound_min_nm", holes.r_min_nm},
            {"r_bound_max_nm", holes.r_max_nm},
            {"n_eff", grid.n_eff},
            {"air_fill_fraction", geometry::air_fill_fraction(grid)},
            {"grade_profile", "parametric default c + (e - c) u^p, normalized product; approximate"},
            {"model", "2D effective-index reduction of the slab"},
            {"spec_digest", spec.digest()}};
}

io::Table holes_table(const geometry::HoleList &holes)
{
    io::Table t;
    t.header = {"x_nm", "y_nm", "r_nm"};
    t.columns.resize(3);
    for (const auto &h : holes.holes)
    {
        t.columns[0].push_back(h.x_nm);
        t.columns[1].push_back(h.y_nm);
        t.columns[2].push_back(h.r_nm);
    }
    return t;
}

fdtd::Component component_key(const ConfigSection &s, const char *key, fdtd::Component fallback)
{
    return s.has(key) ? fdtd::component_from_string(s.get_string(key)) : fallback;
}

json resonance_json(const modes::ResonanceEstimate &e)
{
    return {{"freq_norm", e.freq},
            {"q", e.q},
            {"decay_rate_norm", e.decay_rate},
            {"amplitude_arb", e.amplitude},
            {"phase_rad", e.phase},
            {"t_ref_norm", e.t_ref},
            {"confidence_rel_residual", e.confidence},
            {"q_capped", e.q_capped},
            {"lifetime_exceeds_record", e.lifetime_exceeds_record}};
}

json inversion_json(const modes::HarmonicInversionResult &r)
{
    json modes = json::array();
    for (const auto &e : r.modes)
    {
        modes.push_back(resonance_json(e));
    }
    return {{"modes", modes},
            {"warnings", r.warnings},
            {"ill_conditioned", r.ill_conditioned},
            {"model_order", r.model_order},
            {"decimation", r.decimation}};
}

std::string probe_stem(std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "probe_%02zu", k);
    return buf;
}
} // namespace

// ---------------------------------------------------------------------------

void cmd_lattice(Context &ctx)
{
    const Config &cfg = ctx.cfg();
    cfg.require_sections({"lattice", "raster", "fdtd", "source", "probe", "analysis"});
    auto built = grid_from_config(cfg, ctx.max_mem_bytes);
    ctx.log("lattice: " + std::to_string(built.holes.holes.size()) + " holes, grid " + std::to_string(built.grid.nx) +
            " x " + std::to_string(built.grid.ny));
    ctx.emit_csv("holes.csv", holes_table(built.holes));
    write_grid(ctx, built.grid, "grid");
    const json summary = lattice_summary(*built.spec, built.holes, built.grid);
    ctx.emit_json("lattice.json", summary);
    *ctx.out << summary.dump(2) << '\n';
}

void cmd_simulate(Context &ctx)
{
    const Config &cfg = ctx.cfg();
    cfg.require_sections({"lattice", "raster", "domain", "fdtd", "source", "probe", "analysis"});
    const ConfigSection &f = cfg.section("fdtd");
    f.require_known({"courant", "n_steps", "boundary", "pml_cells", "pml_order", "pml_scale", "symmetry_x",
                     "symmetry_y", "snapshot_stride", "snapshot_start", "energy_stride", "energy_check"});

    fdtd::SimConfig sim;
    sim.courant = f.get_double("courant", 0.5);
    sim.n_steps = f.get_int("n_steps");
    const std::string boundary = f.get_string("boundary", "pml");
    if (boundary == "pml")
    {
        sim.boundary = fdtd::Boundary::pml;
    }
    else if (boundary == "pec")
    {
        sim.boundary = fdtd::Boundary::pec;
    }
    else
    {
        throw ConfigError("fdtd.boundary must be 'pml' or 'pec', got '" + boundary + "'");
    }
    sim.pml.thickness_cells = static_cast<int>(f.get_int("pml_cells", sim.pml.thickness_cells));
    sim.pml.grading_order = f.get_double("pml_order", sim.pml.grading_order);
    sim.pml.sigma_max_scale = f.get_double("pml_scale", sim.pml.sigma_max_scale);
    sim.symmetry_x = fdtd::symmetry_from_string(f.get_string("symmetry_x", "none"));
    sim.symmetry_y = fdtd::symmetry_from_string(f.get_string("symmetry_y", "none"));
    sim.snapshot_stride = f.get_int("snapshot_stride", 0);
    sim.snapshot_start = f.get_int("snapshot_start", 0);
    sim.energy_stride = f.get_int("energy_stride", 0);
    sim.threads = ctx.threads;
    if (ctx.max_mem_bytes)
    {
        sim.max_snapshot_bytes = *ctx.max_mem_bytes;
    }
    const bool energy_check = f.get_bool("energy_check", false);
    if (energy_check && (sim.boundary != fdtd::Boundary::pec || sim.energy_stride <= 0))
    {
        throw ConfigError("fdtd.energy_check needs boundary = pec and energy_stride > 0");
    }

    for (const auto *s : cfg.all("source"))
    {
        s->require_known({"x_nm", "y_nm", "component", "center_freq", "bandwidth", "t0_steps", "amplitude"});
        fdtd::SourceSpec src;
        src.x_nm = s->get_double("x_nm");
        src.y_nm = s->get_double("y_nm");
        src.component = component_key(*s, "component", fdtd::Component::Hz);
        src.center_freq = s->get_double("center_freq");
        src.bandwidth = s->get_double("bandwidth", 0.2 * src.center_freq);
        src.t0_steps = s->get_double("t0_steps", -1.0);
        src.amplitude = s->get_double("amplitude", 1.0);
        sim.sources.push_back(src);
    }
    for (const auto *p : cfg.all("probe"))
    {
        p->require_known({"x_nm", "y_nm", "component"});
        sim.probes.push_back({p->get_double("x_nm"), p->get_double("y_nm"), component_key(*p, "component", fdtd::Component::Hz)});
    }

    // Validate everything cheap before building the grid and stepping.
    const geometry::DielectricGrid probe_grid = geometry::uniform_grid(2, 2, 1.0, 1.0, 1.0);
    {
        fdtd::SimConfig check = sim;
        check.grid = &probe_grid;
        check.validate();
    }
    auto built = grid_from_config(cfg, ctx.max_mem_bytes);
    sim.grid = &built.grid;
    ctx.log("simulate: grid " + std::to_string(built.grid.nx) + " x " + std::to_string(built.grid.ny) + ", " +
            std::to_string(sim.n_steps) + " steps");

    const fdtd::RunResult result = fdtd::run(sim);

    write_grid(ctx, built.grid, "grid");
    if (built.spec)
    {
        ctx.emit_csv("holes.csv", holes_table(built.holes));
    }
    json probes = json::array();
    for (std::size_t k = 0; k < result.records.size(); ++k)
    {
        const auto &rec = result.records[k];
        io::Table t;
        t.header = {"step", "t_normalized", "value"};
        t.columns.resize(3);
        for (std::size_t i = 0; i < rec.samples.size(); ++i)
        {
            t.columns[0].push_back(static_cast<double>(i));
            t.columns[1].push_back(rec.time(i));
            t.columns[2].push_back(rec.samples[i]);
        }
        const std::string stem = probe_stem(k);
        ctx.emit_csv(stem + ".csv", t);
        const json meta = {{"x_nm", rec.x_nm},         {"y_nm", rec.y_nm},     {"component", fdtd::to_string(rec.component)},
                           {"dt_norm", rec.dt},        {"start_step", rec.start_step},
                           {"time_offset_steps", rec.time_offset}, {"samples", rec.samples.size()}};
        ctx.emit_json(stem + ".json", meta);
        probes.push_back(meta);
    }
    for (std::size_t k = 0; k < result.snapshots.size(); ++k)
    {
        write_snapshot(ctx, result.snapshots[k], k, "grid.json");
    }

    json energy_report = {{"performed", false}};
    if (!result.energy.empty())
    {
        io::Table t;
        t.header = {"step", "t_normalized", "energy_norm"};
        t.columns.resize(3);
        for (const auto &e : result.energy)
        {
            t.columns[0].push_back(static_cast<double>(e.step));
            t.columns[1].push_back(e.time);
            t.columns[2].push_back(e.energy);
        }
        ctx.emit_csv("energy.csv", t);
    }
    bool energy_ok = true;
    if (energy_check)
    {
        long settle = 0;
        for (const auto &s : sim.sources)
        {
            settle = std::max(settle, static_cast<long>(std::ceil(s.window_end(result.dt) / result.dt)) + 1);
        }
        double ref = NAN, drift = 0.0;
        std::size_t used = 0;
        for (const auto &e : result.energy)
        {
            if (e.step < settle)
            {
                continue;
            }
            if (std::isnan(ref))
            {
                ref = e.energy;
            }
            drift = std::max(drift, std::abs(e.energy - ref) / std::abs(ref));
            ++used;
        }
        energy_ok = used >= 2 && ref > 0.0 && drift < 1e-3;
        energy_report = {{"performed", true},
                         {"samples", used},
                         {"max_relative_drift", num(drift)},
                         {"tolerance", 1e-3},
                         {"passed", energy_ok}};
    }

    json report = {{"grid_nx", built.grid.nx},
                   {"grid_ny", built.grid.ny},
                   {"dx_nm", built.grid.dx_nm},
                   {"a_nm", built.grid.a_nm},
                   {"n_eff", built.grid.n_eff},
                   {"dt_norm", result.dt},
                   {"courant", sim.courant},
                   {"steps", result.steps_done},
                   {"boundary", boundary},
                   {"symmetry_x", fdtd::to_string(sim.symmetry_x)},
                   {"symmetry_y", fdtd::to_string(sim.symmetry_y)},
                   {"snapshots", result.snapshots.size()},
                   {"probes", probes},
                   {"energy_check", energy_report},
                   {"model", "2D TE effective-index reduction; Q and V_eff are not 3D figures"}};

    if (const auto *a = cfg.find("analysis"))
    {
        a->require_known({"band_lo", "band_hi", "max_modes", "start_step"});
        const double lo = a->get_double("band_lo");
        const double hi = a->get_double("band_hi");
        const int max_modes = static_cast<int>(a->get_int("max_modes", 5));
        // Analysis never starts inside the source window, whatever start_step says.
        const long from = a->get_int("start_step", 0);
        json per_probe = json::array();
        for (auto rec : result.records)
        {
            rec.start_step = std::max(rec.start_step, from);
            json entry = inversion_json(modes::harmonic_inversion(rec, lo, hi, max_modes));
            entry["start_step"] = rec.start_step;
            per_probe.push_back(entry);
        }
        ctx.emit_json("resonances.json", {{"band_lo_norm", lo}, {"band_hi_norm", hi}, {"probes", per_probe}});
    }
    ctx.emit_json("run.json", report);
    *ctx.out << report.dump(2) << '\n';
    if (!energy_ok)
    {
        throw ComputeError("simulate: energy self-check failed (drift above 1e-3 in a closed box)");
    }
}

void cmd_modes(Context &ctx, const std::string &which)
{
    const ConfigSection &m = ctx.section_or_empty("modes");
    m.require_known({"band_lo", "band_hi", "max_modes", "start_step", "freq", "n_clad", "component", "taper",
                     "index", "effective_height_nm"});
    if (ctx.config)
    {
        ctx.config->require_sections({"modes"});
    }
    auto frequency = [&]() {
        if (ctx.freq)
        {
            return *ctx.freq;
        }
        return m.get_double("freq");
    };

    if (which == "resonances")
    {
        const fs::path csv = ctx.input();
        ctx.note_read(csv);
        const io::Table t = io::read_csv(csv);
        fdtd::FieldRecord rec;
        rec.samples = t.column("value");
        const auto &times = t.column("t_normalized");
        if (times.size() < 2)
        {
            throw ConfigError("probe CSV needs at least two samples");
        }
        rec.dt = times[1] - times[0];
        rec.time_offset = times[0] / rec.dt;
        fs::path sidecar = csv;
        sidecar.replace_extension(".json");
        if (fs::exists(sidecar))
        {
            ctx.note_read(sidecar);
            const json meta = io::read_json(sidecar);
            rec.start_step = meta.value("start_step", 0L);
            rec.dt = meta.value("dt_norm", rec.dt);
            rec.time_offset = meta.value("time_offset_steps", rec.time_offset);
        }
        rec.start_step = m.get_int("start_step", rec.start_step);
        const double lo = m.get_double("band_lo");
        const double hi = m.get_double("band_hi");
        const auto r = modes::harmonic_inversion(rec, lo, hi, static_cast<int>(m.get_int("max_modes", 5)));
        json report = inversion_json(r);
        report["band_lo_norm"] = lo;
        report["band_hi_norm"] = hi;
        if (!r.modes.empty())
        {
            try
            {
                const auto rd = modes::ringdown_q(rec, r.modes.front().freq);
                report["ringdown"] = {{"q", rd.q}, {"r2", rd.r2}, {"points", rd.points}};
            }
            catch (const std::exception &e)
            {
                report["ringdown"] = {{"error", e.what()}};
            }
        }
        io::Table out;
        out.header = {"freq_norm", "q", "decay_rate_norm", "amplitude_arb", "phase_rad", "confidence"};
        out.columns.resize(out.header.size());
        for (const auto &e : r.modes)
        {
            out.columns[0].push_back(e.freq);
            out.columns[1].push_back(e.q);
            out.columns[2].push_back(e.decay_rate);
            out.columns[3].push_back(e.amplitude);
            out.columns[4].push_back(e.phase);
            out.columns[5].push_back(e.confidence);
        }
        ctx.emit_csv("resonances.csv", out);
        ctx.emit_json("resonances.json", report);
        *ctx.out << report.dump(2) << '\n';
        return;
    }

    const LoadedSnapshot snap = read_snapshot(ctx, ctx.input());
    if (which == "volume")
    {
        modes::ModeVolumeOptions opt;
        opt.index = m.get_double("index", 0.0);
        if (m.has("effective_height_nm"))
        {
            opt.effective_height_nm = m.get_double("effective_height_nm");
        }
        const auto v = modes::mode_volume(snap.snapshot, snap.grid, frequency(), opt);
        json report = {{"area_nm2", v.area_nm2},
                       {"area_a2", v.area_a2},
                       {"v_eff_air_2d_half_lambda2", v.v_eff_air_2d},
                       {"v_eff_material_2d_half_lambda_over_n2", v.v_eff_material_2d},
                       {"index", v.index},
                       {"wavelength_nm", v.wavelength_nm},
                       {"peak_x_nm", v.peak_x_nm},
                       {"peak_y_nm", v.peak_y_nm},
                       {"valid", v.valid},
                       {"dimension", "2D (per unit height)"}};
        if (v.v_eff_air_3d)
        {
            report["v_eff_air_pseudo3d_half_lambda3"] = *v.v_eff_air_3d;
            report["v_eff_material_pseudo3d_half_lambda_over_n3"] = *v.v_eff_material_3d;
            report["effective_height_nm"] = *opt.effective_height_nm;
        }
        ctx.emit_json("mode_volume.json", report);
        *ctx.out << report.dump(2) << '\n';
    }
    else if (which == "lightcone")
    {
        modes::LightConeOptions opt;
        opt.component = component_key(m, "component", fdtd::Component::Ex);
        opt.taper_fraction = m.get_double("taper", opt.taper_fraction);
        const auto r = modes::light_cone_fraction(snap.snapshot, snap.grid, frequency(), m.get_double("n_clad", 1.0), opt);
        io::write_f64(ctx.output("fourier_power.f64"), r.map.power);
        ctx.emit_json("fourier_power.json", {{"data", "fourier_power.f64"},
                                             {"layout", "float64 little-endian, row-major, row = ky, FFT order"},
                                             {"nx", r.map.nx},
                                             {"ny", r.map.ny},
                                             {"dk_x_2pi_over_a", r.map.nx > 1 ? r.map.kx[1] : 0.0},
                                             {"dk_y_2pi_over_a", r.map.ny > 1 ? r.map.ky[1] : 0.0},
                                             {"light_cone_radius_2pi_over_a", r.map.light_cone_radius}});
        json report = {{"component", fdtd::to_string(opt.component)},
                       {"light_cone_fraction", r.fraction},
                       {"dc_fraction", r.dc_fraction},
                       {"dc_fraction_untapered", r.dc_fraction_untapered},
                       {"dc_power_arb", r.dc_power},
                       {"dc_power_untapered_arb", r.dc_power_untapered},
                       {"total_power_arb", r.total_power},
                       {"light_cone_radius_2pi_over_a", r.map.light_cone_radius},
                       {"taper_fraction", opt.taper_fraction}};
        ctx.emit_json("lightcone.json", report);
        *ctx.out << report.dump(2) << '\n';
    }
    else if (which == "envelope")
    {
        const auto density = modes::electric_energy_density(snap.snapshot, snap.grid);
        const auto e = modes::envelope_gaussian_fit(density, snap.grid);
        json report = {{"sigma_x_nm", e.sigma_x_nm}, {"sigma_y_nm", e.sigma_y_nm}, {"center_x_nm", e.center_x_nm},
                       {"center_y_nm", e.center_y_nm}, {"amplitude_arb", e.amplitude}, {"r2", e.r2},
                       {"poor_fit", e.poor_fit},       {"window_half_cells", e.window_cells}};
        ctx.emit_json("envelope.json", report);
        *ctx.out << report.dump(2) << '\n';
    }
    else
    {
        throw ConfigError("unknown modes subcommand '" + which + "'");
    }
}

} // namespace phcav::cli
