#pragma once

// Thin wrapper over Eigen's Levenberg-Marquardt with a forward-difference Jacobian.

#include <Eigen/Dense>

#include <functional>

namespace phcav::detail
{

using ResidualFn = std::function<void(const Eigen::VectorXd &params, Eigen::VectorXd &residuals)>;

struct LsqResult
{
    Eigen::VectorXd params;
    double sse = 0.0;
    int evaluations = 0;
    bool converged = false;
};

LsqResult levenberg_marquardt(const ResidualFn &fn, const Eigen::VectorXd &start, int n_residuals, int max_evaluations,
                              double tolerance = 1e-15);

} // namespace phcav::detail
