#pragma once

// Graded square-lattice hole pattern, its raster onto a uniform 2D grid, and the
// slab-to-2D effective-index reduction.
//
// Coordinates are in nm with the cavity center at the origin. Rows run along x
// (fixed y), columns along y (fixed x).

#include <cstddef>
#include <string>
#include <vector>

namespace phcav
{
class ConfigSection;
}

namespace phcav::geometry
{

enum class Polarization
{
    TE,
    TM
};

struct LatticeSpec
{
    double a_nm = 305.0;
    int n_rows = 32;
    int n_cols = 25;
    double r_over_a_center = 0.2295;
    double r_over_a_edge_x = 0.29;
    double r_over_a_edge_y = 0.29;
    double grade_exponent = 2.0;
    double slab_thickness_nm = 252.0;
    double n_slab = 3.4;
    double n_clad = 1.0;
    /// Vacuum wavelength used for the effective-index reduction.
    double wavelength_nm = 1300.0;
    Polarization polarization = Polarization::TE;
    /// Displacement of every hole center relative to the cavity center.
    /// Non-zero offsets break the mirror symmetry; the grade is unaffected.
    double offset_x_nm = 0.0;
    double offset_y_nm = 0.0;

    /// Throws ConfigError on violated invariants.
    void validate() const;
    /// Canonical text form; its digest identifies the lattice in output metadata.
    std::string canonical() const;
    std::string digest() const;
};

LatticeSpec lattice_spec_from_config(const ConfigSection &section);

struct Hole
{
    double x_nm;
    double y_nm;
    double r_nm;
};

struct HoleList
{
    std::vector<Hole> holes;
    /// Lattice footprint (n_cols*a by n_rows*a), centered on the cavity.
    double footprint_width_nm = 0.0;
    double footprint_height_nm = 0.0;
    /// Radius bounds implied by the grade endpoints.
    double r_min_nm = 0.0;
    double r_max_nm = 0.0;
};

/// Graded radius r/a at lattice-relative position (x, y). The x-profile
/// c + (e_x - c) (|x|/X)^p and the analogous y-profile are combined as a
/// normalized product f(x) g(y) / c, so either central axis reproduces its own
/// profile. X and Y are the footprint half-widths.
double graded_r_over_a(const LatticeSpec &spec, double x_nm, double y_nm);

/// Holes at x = (j - (n_cols-1)/2) a, y = (i - (n_rows-1)/2) a. An even row count
/// places the cavity center in the dielectric between the two central rows.
/// Throws ConfigError if any graded radius reaches a/2.
HoleList build_graded_lattice(const LatticeSpec &spec);

enum class Smoothing
{
    staircase,
    area_average
};

struct RasterOptions
{
    double dx_nm = 305.0 / 20.0;
    Smoothing smoothing = Smoothing::area_average;
    /// Dielectric margin around the lattice footprint on every side.
    double padding_nm = 3.0 * 305.0;
    int subsamples = 16;
    std::size_t max_bytes = std::size_t{1} << 30;
};

/// Relative permittivity on cell centers, stored row-major (row = y index).
/// The cavity center sits on a cell corner, so the grid is mirror-symmetric
/// about both axes whenever the hole list is.
struct DielectricGrid
{
    int nx = 0;
    int ny = 0;
    double dx_nm = 0.0;
    double origin_x_nm = 0.0; ///< lower-left corner of cell (0, 0)
    double origin_y_nm = 0.0;
    double n_eff = 1.0;
    /// Normalization length for the simulation units (a = 1).
    double a_nm = 1.0;
    std::string spec_digest;
    std::vector<double> eps;

    double &at(int i, int j) { return eps[static_cast<std::size_t>(j) * nx + i]; }
    double at(int i, int j) const { return eps[static_cast<std::size_t>(j) * nx + i]; }
    double width_nm() const { return nx * dx_nm; }
    double height_nm() const { return ny * dx_nm; }
    double cell_x_nm(int i) const { return origin_x_nm + (i + 0.5) * dx_nm; }
    double cell_y_nm(int j) const { return origin_y_nm + (j + 0.5) * dx_nm; }
};

DielectricGrid rasterize(const HoleList &holes, const LatticeSpec &spec, const RasterOptions &options);

/// Uniform-permittivity grid of the given size, centered on the origin.
DielectricGrid uniform_grid(int nx, int ny, double dx_nm, double eps, double a_nm);

/// Fundamental guided-mode index of a symmetric slab, solved by bisection.
double effective_index(double d_nm, double n_slab, double n_clad, double wavelength_nm, Polarization pol);

/// Air fraction of the raster (cells weighted by (n^2 - eps) / (n^2 - 1)).
double air_fill_fraction(const DielectricGrid &grid);

} // namespace phcav::geometry
