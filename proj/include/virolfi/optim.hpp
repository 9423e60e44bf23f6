#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

namespace virolfi {

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_evaluations = 200;
  double initial_step = 0.1;
  double f_tolerance = 1e-10;
  double x_tolerance = 1e-8;
};

/// Derivative-free simplex minimisation. Vertices are clipped into
/// [lower, upper] when bounds are given (pass empty vectors for none).
OptimResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                        const NelderMeadOptions& options = {}, const Eigen::VectorXd& lower = {},
                        const Eigen::VectorXd& upper = {});

/// f(x, grad) returns the value and writes the gradient.
using ValueAndGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct BfgsOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;
  double f_tolerance = 1e-10;
};

/// Box-constrained quasi-Newton minimisation: BFGS directions on the free
/// variables, projection onto the box and Armijo backtracking.
OptimResult minimize_bfgs_box(const ValueAndGradient& fg, const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& upper, const BfgsOptions& options = {});

/// Point `index` (>= 1) of the Halton sequence in [0,1)^dim (dim <= 16).
Eigen::VectorXd halton_point(std::uint64_t index, int dim);

}  // namespace virolfi
