#include "phcav/error.hpp"
#include "phcav/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace phcav::fdtd
{
namespace
{
double parity(Symmetry s)
{
    return s == Symmetry::odd ? -1.0 : 1.0;
}

// Sign picked up by a field component under the mirror x -> -x (axis 0) or y -> -y (axis 1).
double mirror_sign(Component c, Symmetry s, int axis)
{
    const double p = parity(s);
    switch (c)
    {
    case Component::Hz:
        return p;
    case Component::Ex:
        return axis == 0 ? p : -p;
    case Component::Ey:
        return axis == 0 ? -p : p;
    }
    return p;
}

void pml_profile(int n, int thickness, bool low_side, bool high_side, const PMLParams &pml, double dx, double dt,
                 double offset, std::vector<double> &decay, std::vector<double> &gain)
{
    const double m = pml.grading_order;
    const double s_max = pml.sigma_max_scale * 0.8 * (m + 1.0) / dx;
    decay.resize(static_cast<std::size_t>(n));
    gain.resize(static_cast<std::size_t>(n));
    // Cell-centered samples (offset 1/2) span n cells; edge samples span n - 1.
    const double extent = offset > 0.0 ? static_cast<double>(n) : static_cast<double>(n - 1);
    for (int k = 0; k < n; ++k)
    {
        const double pos = k + offset;
        double depth = 0.0;
        if (high_side && pos > extent - thickness)
        {
            depth = std::max(depth, (pos - (extent - thickness)) / thickness);
        }
        if (low_side && pos < thickness)
        {
            depth = std::max(depth, (thickness - pos) / thickness);
        }
        const double s = s_max * std::pow(depth, m);
        if (s > 0.0)
        {
            decay[k] = std::exp(-s * dt);
            gain[k] = (1.0 - decay[k]) / s;
        }
        else
        {
            decay[k] = 1.0;
            gain[k] = dt;
        }
    }
}
} // namespace

Solver::Solver(const geometry::DielectricGrid &grid, const SolverOptions &options) : grid_(&grid), opt_(options)
{
    if (grid.nx < 2 || grid.ny < 2 || grid.eps.size() != static_cast<std::size_t>(grid.nx) * grid.ny)
    {
        throw ConfigError("fdtd: dielectric grid is empty or inconsistent");
    }
    if (!opt_.allow_unstable && !(opt_.courant > 0.0 && opt_.courant <= 1.0 / std::numbers::sqrt2))
    {
        throw ConfigError("fdtd: courant number must lie in (0, 1/sqrt(2)] for a 2D Yee grid");
    }
    dx_ = grid.dx_nm / grid.a_nm;
    dt_ = opt_.courant * dx_;

    auto center_on_edge = [](int n, double origin, double pitch) {
        return n % 2 == 0 && std::abs(origin + 0.5 * n * pitch) <= 1e-9 * pitch * n;
    };
    nx_ = grid.nx;
    ny_ = grid.ny;
    if (opt_.symmetry_x != Symmetry::none)
    {
        if (!center_on_edge(grid.nx, grid.origin_x_nm, grid.dx_nm))
        {
            throw ConfigError("fdtd: symmetry_x needs an even grid centered on x = 0");
        }
        i_off_ = grid.nx / 2;
        nx_ = grid.nx / 2;
    }
    if (opt_.symmetry_y != Symmetry::none)
    {
        if (!center_on_edge(grid.ny, grid.origin_y_nm, grid.dx_nm))
        {
            throw ConfigError("fdtd: symmetry_y needs an even grid centered on y = 0");
        }
        j_off_ = grid.ny / 2;
        ny_ = grid.ny / 2;
    }
    const bool use_pml = opt_.boundary == Boundary::pml;
    if (use_pml)
    {
        const int t = opt_.pml.thickness_cells;
        if (t < 8 || opt_.pml.grading_order < 2.0 || opt_.pml.grading_order > 4.0 || !(opt_.pml.sigma_max_scale > 0.0))
        {
            throw ConfigError("fdtd: PML needs thickness >= 8 cells and grading order in [2, 4]");
        }
        if (2 * t >= std::min(nx_, ny_))
        {
            throw ConfigError("fdtd: PML layers leave no interior");
        }
    }

    const std::size_t n_h = static_cast<std::size_t>(nx_) * ny_;
    const std::size_t n_ex = static_cast<std::size_t>(nx_) * (ny_ + 1);
    const std::size_t n_ey = static_cast<std::size_t>(nx_ + 1) * ny_;
    hzx_.assign(n_h, 0.0);
    hzy_.assign(n_h, 0.0);
    ex_.assign(n_ex, 0.0);
    ex_prev_.assign(n_ex, 0.0);
    ey_.assign(n_ey, 0.0);
    ey_prev_.assign(n_ey, 0.0);

    auto eps_cell = [&](int i, int j) {
        // Stepped (i, j), clamped to the domain: the mirror image of the first
        // stepped cell is the cell itself, and beyond PEC walls the edge cell is reused.
        i = std::clamp(i, 0, nx_ - 1);
        j = std::clamp(j, 0, ny_ - 1);
        return grid.at(i + i_off_, j + j_off_);
    };
    eps_x_.resize(n_ex);
    inv_eps_x_.resize(n_ex);
    for (int j = 0; j <= ny_; ++j)
    {
        for (int i = 0; i < nx_; ++i)
        {
            const double e = 0.5 * (eps_cell(i, j - 1) + eps_cell(i, j));
            eps_x_[static_cast<std::size_t>(j) * nx_ + i] = e;
            inv_eps_x_[static_cast<std::size_t>(j) * nx_ + i] = 1.0 / e;
        }
    }
    eps_y_.resize(n_ey);
    inv_eps_y_.resize(n_ey);
    for (int j = 0; j < ny_; ++j)
    {
        for (int i = 0; i <= nx_; ++i)
        {
            const double e = 0.5 * (eps_cell(i - 1, j) + eps_cell(i, j));
            eps_y_[static_cast<std::size_t>(j) * (nx_ + 1) + i] = e;
            inv_eps_y_[static_cast<std::size_t>(j) * (nx_ + 1) + i] = 1.0 / e;
        }
    }

    const int t = use_pml ? opt_.pml.thickness_cells : 0;
    const bool low_x = use_pml && opt_.symmetry_x == Symmetry::none;
    const bool low_y = use_pml && opt_.symmetry_y == Symmetry::none;
    pml_profile(nx_, t, low_x, use_pml, opt_.pml, dx_, dt_, 0.5, hx_decay_, hx_gain_);
    pml_profile(ny_, t, low_y, use_pml, opt_.pml, dx_, dt_, 0.5, hy_decay_, hy_gain_);
    pml_profile(nx_ + 1, t, low_x, use_pml, opt_.pml, dx_, dt_, 0.0, ey_decay_, ey_gain_);
    pml_profile(ny_ + 1, t, low_y, use_pml, opt_.pml, dx_, dt_, 0.0, ex_decay_, ex_gain_);
}

void Solver::zero()
{
    std::fill(hzx_.begin(), hzx_.end(), 0.0);
    std::fill(hzy_.begin(), hzy_.end(), 0.0);
    std::fill(ex_.begin(), ex_.end(), 0.0);
    std::fill(ex_prev_.begin(), ex_prev_.end(), 0.0);
    std::fill(ey_.begin(), ey_.end(), 0.0);
    std::fill(ey_prev_.begin(), ey_prev_.end(), 0.0);
    steps_ = 0;
}

void Solver::update_h(int j0, int j1)
{
    const double inv_dx = 1.0 / dx_;
    const int sx = nx_ + 1;
    for (int j = j0; j < j1; ++j)
    {
        const double dec_y = hy_decay_[j];
        const double gain_y = hy_gain_[j] * inv_dx;
        double *hx = &hzx_[static_cast<std::size_t>(j) * nx_];
        double *hy = &hzy_[static_cast<std::size_t>(j) * nx_];
        const double *ey_row = &ey_[static_cast<std::size_t>(j) * sx];
        const double *ex_lo = &ex_[static_cast<std::size_t>(j) * nx_];
        const double *ex_hi = ex_lo + nx_;
        for (int i = 0; i < nx_; ++i)
        {
            const double d_ey = ey_row[i + 1] - ey_row[i];
            const double d_ex = ex_hi[i] - ex_lo[i];
            hx[i] = hx_decay_[i] * hx[i] - hx_gain_[i] * inv_dx * d_ey;
            hy[i] = dec_y * hy[i] + gain_y * d_ex;
        }
    }
}

void Solver::begin_e_phase()
{
    std::swap(ex_, ex_prev_);
    std::swap(ey_, ey_prev_);
}

void Solver::update_e(int j0, int j1)
{
    const double inv_dx = 1.0 / dx_;
    const int sx = nx_ + 1;
    const bool mirror_x = opt_.symmetry_x != Symmetry::none;
    const bool mirror_y = opt_.symmetry_y != Symmetry::none;
    const double ghost_x = parity(opt_.symmetry_x);
    const double ghost_y = parity(opt_.symmetry_y);

    auto hz_at = [&](int i, int j) {
        const auto k = static_cast<std::size_t>(j) * nx_ + i;
        return hzx_[k] + hzy_[k];
    };

    // E_x rows: j in [j0, j1), plus the top PEC row when this band ends the domain.
    const int ex_end = (j1 == ny_) ? ny_ + 1 : j1;
    for (int j = j0; j < ex_end; ++j)
    {
        double *e = &ex_[static_cast<std::size_t>(j) * nx_];
        const double *e_old = &ex_prev_[static_cast<std::size_t>(j) * nx_];
        const double *inv = &inv_eps_x_[static_cast<std::size_t>(j) * nx_];
        if (j == ny_ || (j == 0 && !mirror_y))
        {
            std::fill(e, e + nx_, 0.0);
            continue;
        }
        const double dec = ex_decay_[j];
        const double g = ex_gain_[j] * inv_dx;
        for (int i = 0; i < nx_; ++i)
        {
            const double h_hi = hz_at(i, j);
            const double h_lo = (j == 0) ? ghost_y * h_hi : hz_at(i, j - 1);
            e[i] = dec * e_old[i] + g * inv[i] * (h_hi - h_lo);
        }
    }

    for (int j = j0; j < j1; ++j)
    {
        double *e = &ey_[static_cast<std::size_t>(j) * sx];
        const double *e_old = &ey_prev_[static_cast<std::size_t>(j) * sx];
        const double *inv = &inv_eps_y_[static_cast<std::size_t>(j) * sx];
        const std::size_t row = static_cast<std::size_t>(j) * nx_;
        if (mirror_x)
        {
            const double h = hzx_[row] + hzy_[row];
            e[0] = ey_decay_[0] * e_old[0] - ey_gain_[0] * inv_dx * inv[0] * (h - ghost_x * h);
        }
        else
        {
            e[0] = 0.0;
        }
        for (int i = 1; i < nx_; ++i)
        {
            const double d_h = (hzx_[row + i] + hzy_[row + i]) - (hzx_[row + i - 1] + hzy_[row + i - 1]);
            e[i] = ey_decay_[i] * e_old[i] - ey_gain_[i] * inv_dx * inv[i] * d_h;
        }
        e[nx_] = 0.0;
    }
}

void Solver::step()
{
    update_h(0, ny_);
    begin_e_phase();
    update_e(0, ny_);
    advance_clock();
}

Solver::Node Solver::locate(Component c, double x_nm, double y_nm) const
{
    const auto &g = *grid_;
    double sx = (x_nm - g.origin_x_nm) / g.dx_nm - i_off_;
    double sy = (y_nm - g.origin_y_nm) / g.dx_nm - j_off_;
    double sign = 1.0;
    if (opt_.symmetry_x != Symmetry::none && sx < 0.0)
    {
        sx = -sx;
        sign *= mirror_sign(c, opt_.symmetry_x, 0);
    }
    if (opt_.symmetry_y != Symmetry::none && sy < 0.0)
    {
        sy = -sy;
        sign *= mirror_sign(c, opt_.symmetry_y, 1);
    }
    Node n{};
    switch (c)
    {
    case Component::Hz:
        n.i = static_cast<int>(std::floor(sx));
        n.j = static_cast<int>(std::floor(sy));
        break;
    case Component::Ex:
        n.i = static_cast<int>(std::floor(sx));
        n.j = static_cast<int>(std::lround(sy));
        break;
    case Component::Ey:
        n.i = static_cast<int>(std::lround(sx));
        n.j = static_cast<int>(std::floor(sy));
        break;
    }
    const int max_i = (c == Component::Ey) ? nx_ : nx_ - 1;
    const int max_j = (c == Component::Ex) ? ny_ : ny_ - 1;
    if (n.i < 0 || n.j < 0 || n.i > max_i || n.j > max_j)
    {
        std::ostringstream msg;
        msg << "fdtd: point (" << x_nm << ", " << y_nm << ") nm lies outside the simulated domain";
        throw ConfigError(msg.str());
    }
    // Nodes on a mirror wall where the component is forced to zero by parity.
    if (c == Component::Ey && n.i == 0 && opt_.symmetry_x == Symmetry::even)
    {
        sign = 0.0;
    }
    if (c == Component::Ex && n.j == 0 && opt_.symmetry_y == Symmetry::even)
    {
        sign = 0.0;
    }
    n.sign = sign;
    return n;
}

void Solver::add_source(Component c, double x_nm, double y_nm, double value)
{
    const Node n = locate(c, x_nm, y_nm);
    switch (c)
    {
    case Component::Hz:
        hzx_[static_cast<std::size_t>(n.j) * nx_ + n.i] += n.sign * value;
        break;
    case Component::Ex:
        ex(n.i, n.j) += n.sign * value;
        break;
    case Component::Ey:
        ey(n.i, n.j) += n.sign * value;
        break;
    }
}

double Solver::probe(Component c, double x_nm, double y_nm) const
{
    const Node n = locate(c, x_nm, y_nm);
    switch (c)
    {
    case Component::Hz:
        return n.sign * hz(n.i, n.j);
    case Component::Ex:
        return n.sign * ex_[static_cast<std::size_t>(n.j) * nx_ + n.i];
    case Component::Ey:
        return n.sign * ey_[static_cast<std::size_t>(n.j) * (nx_ + 1) + n.i];
    }
    return 0.0;
}

double Solver::energy() const
{
    const bool mirror_x = opt_.symmetry_x != Symmetry::none;
    const bool mirror_y = opt_.symmetry_y != Symmetry::none;
    double sum_e = 0.0;
    for (int j = 0; j <= ny_; ++j)
    {
        const double w = (mirror_y && j == 0) ? 0.5 : 1.0;
        double row = 0.0;
        for (int i = 0; i < nx_; ++i)
        {
            const auto k = static_cast<std::size_t>(j) * nx_ + i;
            row += eps_x_[k] * ex_prev_[k] * ex_[k];
        }
        sum_e += w * row;
    }
    for (int j = 0; j < ny_; ++j)
    {
        for (int i = 0; i <= nx_; ++i)
        {
            const double w = (mirror_x && i == 0) ? 0.5 : 1.0;
            const auto k = static_cast<std::size_t>(j) * (nx_ + 1) + i;
            sum_e += w * eps_y_[k] * ey_prev_[k] * ey_[k];
        }
    }
    double sum_h = 0.0;
    for (std::size_t k = 0; k < hzx_.size(); ++k)
    {
        const double h = hzx_[k] + hzy_[k];
        sum_h += h * h;
    }
    const double factor = (mirror_x ? 2.0 : 1.0) * (mirror_y ? 2.0 : 1.0);
    return factor * 0.5 * (sum_e + sum_h) * dx_ * dx_;
}

std::vector<double> Solver::hz_reduced() const
{
    std::vector<double> out(hzx_.size());
    for (std::size_t k = 0; k < out.size(); ++k)
    {
        out[k] = hzx_[k] + hzy_[k];
    }
    return out;
}

Snapshot Solver::snapshot(const std::vector<double> *hz_prev) const
{
    Snapshot s;
    s.step = steps_;
    s.time = steps_ * dt_;
    s.nx = grid_->nx;
    s.ny = grid_->ny;
    s.symmetry_x = opt_.symmetry_x;
    s.symmetry_y = opt_.symmetry_y;
    s.unfolded = opt_.symmetry_x != Symmetry::none || opt_.symmetry_y != Symmetry::none;
    const std::size_t n = static_cast<std::size_t>(s.nx) * s.ny;
    s.hz.assign(n, 0.0);
    s.ex.assign(n, 0.0);
    s.ey.assign(n, 0.0);

    const int sx = nx_ + 1;
    for (int j = 0; j < ny_; ++j)
    {
        for (int i = 0; i < nx_; ++i)
        {
            const auto k = static_cast<std::size_t>(j) * nx_ + i;
            double h = hzx_[k] + hzy_[k];
            if (hz_prev)
            {
                h = 0.5 * (h + (*hz_prev)[k]);
            }
            const double ex_c = 0.5 * (ex_[k] + ex_[k + nx_]);
            const auto ky = static_cast<std::size_t>(j) * sx + i;
            const double ey_c = 0.5 * (ey_[ky] + ey_[ky + 1]);

            // Write the stepped cell and its mirror images.
            for (int mx = 0; mx < 2; ++mx)
            {
                if (mx == 1 && opt_.symmetry_x == Symmetry::none)
                {
                    break;
                }
                for (int my = 0; my < 2; ++my)
                {
                    if (my == 1 && opt_.symmetry_y == Symmetry::none)
                    {
                        break;
                    }
                    const int fi = mx ? i_off_ - 1 - i : i_off_ + i;
                    const int fj = my ? j_off_ - 1 - j : j_off_ + j;
                    double shz = 1.0, sex = 1.0, sey = 1.0;
                    if (mx)
                    {
                        shz *= mirror_sign(Component::Hz, opt_.symmetry_x, 0);
                        sex *= mirror_sign(Component::Ex, opt_.symmetry_x, 0);
                        sey *= mirror_sign(Component::Ey, opt_.symmetry_x, 0);
                    }
                    if (my)
                    {
                        shz *= mirror_sign(Component::Hz, opt_.symmetry_y, 1);
                        sex *= mirror_sign(Component::Ex, opt_.symmetry_y, 1);
                        sey *= mirror_sign(Component::Ey, opt_.symmetry_y, 1);
                    }
                    const auto f = static_cast<std::size_t>(fj) * s.nx + fi;
                    s.hz[f] = shz * h;
                    s.ex[f] = sex * ex_c;
                    s.ey[f] = sey * ey_c;
                }
            }
        }
    }
    return s;
}

bool Solver::finite() const
{
    auto ok = [](const std::vector<double> &v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return ok(hzx_) && ok(hzy_) && ok(ex_) && ok(ey_);
}

const std::vector<double> &Snapshot::component(Component c) const
{
    switch (c)
    {
    case Component::Hz:
        return hz;
    case Component::Ex:
        return ex;
    case Component::Ey:
        return ey;
    }
    return hz;
}

double total_energy(const Snapshot &snapshot, const geometry::DielectricGrid &grid)
{
    const std::size_t n = static_cast<std::size_t>(snapshot.nx) * snapshot.ny;
    if (snapshot.nx != grid.nx || snapshot.ny != grid.ny || snapshot.hz.size() != n || snapshot.ex.size() != n ||
        snapshot.ey.size() != n || grid.eps.size() != n)
    {
        throw ConfigError("total_energy: snapshot and grid shapes differ");
    }
    const double area = (grid.dx_nm / grid.a_nm) * (grid.dx_nm / grid.a_nm);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        sum += grid.eps[k] * (snapshot.ex[k] * snapshot.ex[k] + snapshot.ey[k] * snapshot.ey[k]) +
               snapshot.hz[k] * snapshot.hz[k];
    }
    return 0.5 * sum * area;
}

Component component_from_string(const std::string &name)
{
    if (name == "Hz")
    {
        return Component::Hz;
    }
    if (name == "Ex")
    {
        return Component::Ex;
    }
    if (name == "Ey")
    {
        return Component::Ey;
    }
    throw ConfigError("unknown field component '" + name + "' (expected Hz, Ex or Ey)");
}

std::string to_string(Component c)
{
    switch (c)
    {
    case Component::Hz:
        return "Hz";
    case Component::Ex:
        return "Ex";
    case Component::Ey:
        return "Ey";
    }
    return "Hz";
}

Symmetry symmetry_from_string(const std::string &name)
{
    if (name == "none")
    {
        return Symmetry::none;
    }
    if (name == "even")
    {
        return Symmetry::even;
    }
    if (name == "odd")
    {
        return Symmetry::odd;
    }
    throw ConfigError("unknown symmetry '" + name + "' (expected none, even or odd)");
}

std::string to_string(Symmetry s)
{
    switch (s)
    {
    case Symmetry::none:
        return "none";
    case Symmetry::even:
        return "even";
    case Symmetry::odd:
        return "odd";
    }
    return "none";
}

} // namespace phcav::fdtd
