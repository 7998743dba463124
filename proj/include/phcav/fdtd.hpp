#pragma once

// 2D TE Yee solver (H_z, E_x, E_y) in normalized units: a = 1, c = 1, eps0 = mu0 = 1.
//
// Staggering on cell (i, j) of the dielectric grid (x = i, y = j in cell units):
//   H_z at the cell center (i+1/2, j+1/2)
//   E_x on the horizontal edge (i+1/2, j)
//   E_y on the vertical edge (i, j+1/2)
//
// Mirror symmetry is expressed as the parity of H_z: symmetry_x = odd means
// H_z(-x, y) = -H_z(x, y), which also makes E_x odd and E_y even in x. With a
// symmetry set, only the half x >= 0 (or y >= 0) is stepped, with a mirror wall
// on the plane through the cavity center.

#include "phcav/geometry.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace phcav::fdtd
{

enum class Component
{
    Hz,
    Ex,
    Ey
};

enum class Symmetry
{
    none,
    even,
    odd
};

enum class Boundary
{
    pml,
    pec
};

struct PMLParams
{
    int thickness_cells = 12;
    double sigma_max_scale = 1.0;
    double grading_order = 3.0;
};

struct SourceSpec
{
    double x_nm = 0.0;
    double y_nm = 0.0;
    Component component = Component::Hz;
    double center_freq = 0.25; ///< a / lambda
    double bandwidth = 0.05;   ///< spectral standard deviation, a / lambda
    /// Peak time in steps; negative selects 4 / bandwidth so the pulse starts from zero.
    double t0_steps = -1.0;
    double amplitude = 1.0;

    double sigma_t() const;
    double peak_time(double dt) const;
    /// Source is considered off outside [t0 - 4/bandwidth, t0 + 4/bandwidth].
    double window_end(double dt) const;
    double value(double t, double dt) const;
};

struct ProbeSpec
{
    double x_nm = 0.0;
    double y_nm = 0.0;
    Component component = Component::Hz;
};

struct SimConfig
{
    const geometry::DielectricGrid *grid = nullptr;
    double courant = 0.5;
    long n_steps = 1000;
    Boundary boundary = Boundary::pml;
    PMLParams pml;
    std::vector<SourceSpec> sources;
    std::vector<ProbeSpec> probes;
    long snapshot_stride = 0; ///< 0 disables snapshots
    long snapshot_start = 0;
    Symmetry symmetry_x = Symmetry::none;
    Symmetry symmetry_y = Symmetry::none;
    int threads = 1;
    std::size_t max_snapshot_bytes = std::size_t{1} << 30;
    long energy_stride = 0; ///< 0 disables the energy series
    /// Only for stability demonstrations: skip the Courant check.
    bool allow_unstable = false;

    void validate() const;
};

/// Time series of one probe. Sample k is taken at the end of step k.
struct FieldRecord
{
    double x_nm = 0.0;
    double y_nm = 0.0;
    Component component = Component::Hz;
    double dt = 0.0;
    /// First sample after every source window has closed.
    long start_step = 0;
    /// Sample k sits at (k + time_offset) dt: 1/2 for H_z, 1 for E components.
    double time_offset = 1.0;
    std::vector<double> samples;

    double time(std::size_t k) const { return (static_cast<double>(k) + time_offset) * dt; }
};

/// Full-grid fields interpolated to cell centers, time-synchronized at `step`.
struct Snapshot
{
    long step = 0;
    double time = 0.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> hz;
    std::vector<double> ex;
    std::vector<double> ey;
    /// True when the run stepped a symmetry-reduced domain and this snapshot
    /// was reconstructed by mirroring.
    bool unfolded = false;
    Symmetry symmetry_x = Symmetry::none;
    Symmetry symmetry_y = Symmetry::none;
    /// Frequency interval the sources excited (a / lambda).
    double band_lo = 0.0;
    double band_hi = 0.0;

    const std::vector<double> &component(Component c) const;
};

struct EnergySample
{
    long step;
    double time;
    double energy;
};

struct RunResult
{
    std::vector<FieldRecord> records;
    std::vector<Snapshot> snapshots;
    std::vector<EnergySample> energy;
    double dt = 0.0;
    long steps_done = 0;
};

class DivergenceError : public std::runtime_error
{
public:
    DivergenceError(long step, const std::string &what) : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

struct SolverOptions
{
    double courant = 0.5;
    Boundary boundary = Boundary::pml;
    PMLParams pml;
    Symmetry symmetry_x = Symmetry::none;
    Symmetry symmetry_y = Symmetry::none;
    bool allow_unstable = false;
};

/// Stepped fields on the (possibly symmetry-reduced) domain. Exclusive use during a run.
class Solver
{
public:
    Solver(const geometry::DielectricGrid &grid, const SolverOptions &options);

    /// One leapfrog update, H then E, on the whole domain.
    void step();

    /// Rows [j0, j1) of the H phase and of the E phase; E-phase row ny is owned by
    /// the band that ends at ny. Used by the banded parallel driver.
    void update_h(int j0, int j1);
    void update_e(int j0, int j1);
    void begin_e_phase(); ///< swaps E buffers; call once before the E bands
    void advance_clock() { ++steps_; }

    /// Soft source: adds `value` to the component at the nearest Yee node of (x, y).
    void add_source(Component c, double x_nm, double y_nm, double value);
    double probe(Component c, double x_nm, double y_nm) const;

    /// Discrete energy invariant sum(eps E^n . E^{n+1} + H^{n+1/2}^2) / 2 * dA on the
    /// full (unfolded) domain. Exactly conserved by a lossless closed grid.
    double energy() const;

    /// Cell-centered full-grid fields; `hz_prev` (optional) is H_z one half-step
    /// earlier, used to time-center H against E.
    Snapshot snapshot(const std::vector<double> *hz_prev = nullptr) const;
    std::vector<double> hz_reduced() const;

    bool finite() const;

    double dt() const { return dt_; }
    double dx() const { return dx_; }
    long steps() const { return steps_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int full_nx() const { return grid_->nx; }
    int full_ny() const { return grid_->ny; }
    const geometry::DielectricGrid &grid() const { return *grid_; }

    void zero();
    double &ex(int i, int j) { return ex_[static_cast<std::size_t>(j) * nx_ + i]; }
    double &ey(int i, int j) { return ey_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
    double hz(int i, int j) const
    {
        const auto k = static_cast<std::size_t>(j) * nx_ + i;
        return hzx_[k] + hzy_[k];
    }

private:
    struct Node
    {
        int i;
        int j;
        double sign;
    };
    Node locate(Component c, double x_nm, double y_nm) const;

    const geometry::DielectricGrid *grid_;
    SolverOptions opt_;
    int nx_ = 0; ///< stepped cells
    int ny_ = 0;
    int i_off_ = 0; ///< first stepped full-grid cell
    int j_off_ = 0;
    double dx_ = 0.0; ///< cell pitch in units of a
    double dt_ = 0.0;
    long steps_ = 0;

    std::vector<double> hzx_, hzy_;
    std::vector<double> ex_, ex_prev_; ///< (ny+1) x nx
    std::vector<double> ey_, ey_prev_; ///< ny x (nx+1)
    std::vector<double> inv_eps_x_, inv_eps_y_, eps_x_, eps_y_;

    // Per-column / per-row PML coefficients: decay = exp(-s dt), gain = (1 - decay) / s.
    std::vector<double> hx_decay_, hx_gain_; ///< at x = i + 1/2
    std::vector<double> hy_decay_, hy_gain_; ///< at y = j + 1/2
    std::vector<double> ex_decay_, ex_gain_; ///< E_x, at y = j
    std::vector<double> ey_decay_, ey_gain_; ///< E_y, at x = i
};

/// Deterministic for a given config, independent of the thread count.
RunResult run(const SimConfig &config);

/// sum (eps |E|^2 + |H|^2) / 2 * cell area over cell-centered snapshot fields,
/// in simulation units (a = 1).
double total_energy(const Snapshot &snapshot, const geometry::DielectricGrid &grid);

Component component_from_string(const std::string &name);
std::string to_string(Component c);
Symmetry symmetry_from_string(const std::string &name);
std::string to_string(Symmetry s);

} // namespace phcav::fdtd
