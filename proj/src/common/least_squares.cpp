#include "least_squares.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

namespace phcav::detail
{
namespace
{
struct Functor
{
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    using QRSolver = Eigen::ColPivHouseholderQR<JacobianType>;
    enum
    {
        InputsAtCompileTime = Eigen::Dynamic,
        ValuesAtCompileTime = Eigen::Dynamic
    };

    const ResidualFn *fn;
    int n_in;
    int n_out;

    int inputs() const { return n_in; }
    int values() const { return n_out; }
    int operator()(const InputType &x, ValueType &f) const
    {
        (*fn)(x, f);
        return 0;
    }
};
} // namespace

LsqResult levenberg_marquardt(const ResidualFn &fn, const Eigen::VectorXd &start, int n_residuals, int max_evaluations,
                              double tolerance)
{
    Functor base{&fn, static_cast<int>(start.size()), n_residuals};
    Eigen::NumericalDiff<Functor> diff(base);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(diff);
    lm.setMaxfev(max_evaluations);
    lm.setXtol(tolerance);
    lm.setFtol(tolerance);
    lm.setGtol(0.0);
    Eigen::VectorXd x = start;
    const auto status = lm.minimize(x);
    LsqResult r;
    r.params = x;
    r.evaluations = static_cast<int>(lm.nfev());
    Eigen::VectorXd f(n_residuals);
    fn(x, f);
    r.sse = f.squaredNorm();
    r.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
    return r;
}

} // namespace phcav::detail
