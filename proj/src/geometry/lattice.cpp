#include "phcav/config.hpp"
#include "phcav/error.hpp"
#include "phcav/geometry.hpp"
#include "phcav/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phcav::geometry
{

void LatticeSpec::validate() const
{
    if (!(a_nm > 0.0))
    {
        throw ConfigError("lattice: a_nm must be positive");
    }
    if (n_rows < 3 || n_cols < 3)
    {
        throw ConfigError("lattice: rows and cols must be at least 3");
    }
    for (double r : {r_over_a_center, r_over_a_edge_x, r_over_a_edge_y})
    {
        if (!(r > 0.0 && r < 0.5))
        {
            throw ConfigError("lattice: r/a endpoints must lie in (0, 0.5)");
        }
    }
    if (!(grade_exponent > 0.0))
    {
        throw ConfigError("lattice: grade_exponent must be positive");
    }
    if (!(slab_thickness_nm > 0.0) || !(wavelength_nm > 0.0))
    {
        throw ConfigError("lattice: d_nm and lambda_nm must be positive");
    }
    if (!(n_clad >= 1.0) || !(n_slab > n_clad))
    {
        throw ConfigError("lattice: need n_slab > n_clad >= 1");
    }
}

std::string LatticeSpec::canonical() const
{
    using io::format_double;
    std::ostringstream out;
    out << "a_nm=" << format_double(a_nm) << '\n'
        << "rows=" << n_rows << '\n'
        << "cols=" << n_cols << '\n'
        << "r_over_a_center=" << format_double(r_over_a_center) << '\n'
        << "r_over_a_edge_x=" << format_double(r_over_a_edge_x) << '\n'
        << "r_over_a_edge_y=" << format_double(r_over_a_edge_y) << '\n'
        << "grade_exponent=" << format_double(grade_exponent) << '\n'
        << "d_nm=" << format_double(slab_thickness_nm) << '\n'
        << "n_slab=" << format_double(n_slab) << '\n'
        << "n_clad=" << format_double(n_clad) << '\n'
        << "lambda_nm=" << format_double(wavelength_nm) << '\n'
        << "polarization=" << (polarization == Polarization::TE ? "TE" : "TM") << '\n'
        << "offset_x_nm=" << format_double(offset_x_nm) << '\n'
        << "offset_y_nm=" << format_double(offset_y_nm) << '\n';
    return out.str();
}

std::string LatticeSpec::digest() const
{
    return io::sha256_hex(canonical());
}

LatticeSpec lattice_spec_from_config(const ConfigSection &s)
{
    s.require_known({"a_nm", "rows", "cols", "r_over_a_center", "r_over_a_edge_x", "r_over_a_edge_y",
                     "grade_exponent", "d_nm", "n_slab", "n_clad", "lambda_nm", "polarization", "offset_x_nm",
                     "offset_y_nm"});
    LatticeSpec spec;
    spec.a_nm = s.get_double("a_nm");
    spec.n_rows = static_cast<int>(s.get_int("rows"));
    spec.n_cols = static_cast<int>(s.get_int("cols"));
    spec.r_over_a_center = s.get_double("r_over_a_center");
    spec.r_over_a_edge_x = s.get_double("r_over_a_edge_x", spec.r_over_a_center);
    spec.r_over_a_edge_y = s.get_double("r_over_a_edge_y", spec.r_over_a_center);
    spec.grade_exponent = s.get_double("grade_exponent", 2.0);
    spec.slab_thickness_nm = s.get_double("d_nm");
    spec.n_slab = s.get_double("n_slab");
    spec.n_clad = s.get_double("n_clad", 1.0);
    spec.wavelength_nm = s.get_double("lambda_nm", 1300.0);
    const std::string pol = s.get_string("polarization", "TE");
    if (pol == "TE")
    {
        spec.polarization = Polarization::TE;
    }
    else if (pol == "TM")
    {
        spec.polarization = Polarization::TM;
    }
    else
    {
        throw ConfigError("lattice.polarization must be TE or TM");
    }
    spec.offset_x_nm = s.get_double("offset_x_nm", 0.0);
    spec.offset_y_nm = s.get_double("offset_y_nm", 0.0);
    spec.validate();
    return spec;
}

double graded_r_over_a(const LatticeSpec &spec, double x_nm, double y_nm)
{
    const double half_w = 0.5 * spec.n_cols * spec.a_nm;
    const double half_h = 0.5 * spec.n_rows * spec.a_nm;
    const double u = std::min(1.0, std::abs(x_nm) / half_w);
    const double v = std::min(1.0, std::abs(y_nm) / half_h);
    const double c = spec.r_over_a_center;
    const double fx = c + (spec.r_over_a_edge_x - c) * std::pow(u, spec.grade_exponent);
    const double fy = c + (spec.r_over_a_edge_y - c) * std::pow(v, spec.grade_exponent);
    return fx * fy / c;
}

HoleList build_graded_lattice(const LatticeSpec &spec)
{
    spec.validate();

    HoleList out;
    out.footprint_width_nm = spec.n_cols * spec.a_nm;
    out.footprint_height_nm = spec.n_rows * spec.a_nm;
    out.holes.reserve(static_cast<std::size_t>(spec.n_rows) * spec.n_cols);

    const double c = spec.r_over_a_center;
    const double lo_x = std::min(c, spec.r_over_a_edge_x);
    const double hi_x = std::max(c, spec.r_over_a_edge_x);
    const double lo_y = std::min(c, spec.r_over_a_edge_y);
    const double hi_y = std::max(c, spec.r_over_a_edge_y);
    out.r_min_nm = lo_x * lo_y / c * spec.a_nm;
    out.r_max_nm = hi_x * hi_y / c * spec.a_nm;

    for (int i = 0; i < spec.n_rows; ++i)
    {
        const double y = (i - 0.5 * (spec.n_rows - 1)) * spec.a_nm;
        for (int j = 0; j < spec.n_cols; ++j)
        {
            const double x = (j - 0.5 * (spec.n_cols - 1)) * spec.a_nm;
            const double r_over_a = graded_r_over_a(spec, x, y);
            if (!(r_over_a < 0.5))
            {
                std::ostringstream msg;
                msg << "lattice: graded radius r/a = " << r_over_a << " at site (row " << i << ", col " << j
                    << ") reaches a/2; neighbouring holes would merge";
                throw ConfigError(msg.str());
            }
            out.holes.push_back({x + spec.offset_x_nm, y + spec.offset_y_nm, r_over_a * spec.a_nm});
        }
    }
    return out;
}

} // namespace phcav::geometry
