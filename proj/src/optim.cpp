#include "virolfi/optim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace virolfi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd clip(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() == 0) return x;
  return x.cwiseMax(lo).cwiseMin(hi);
}

double finite_or_inf(double v) { return std::isnan(v) ? kInf : v; }

}  // namespace

OptimResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                        const NelderMeadOptions& options, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const int n = static_cast<int>(x0.size());
  if (lower.size() != 0 && (lower.size() != n || upper.size() != n))
    throw std::invalid_argument("nelder_mead: bound dimension mismatch");

  OptimResult result;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++result.evaluations;
    return finite_or_inf(f(x));
  };

  std::vector<Eigen::VectorXd> simplex(n + 1, clip(x0, lower, upper));
  std::vector<double> values(n + 1);
  values[0] = eval(simplex[0]);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = simplex[0];
    double step = options.initial_step;
    if (lower.size() != 0 && v[i] + step > upper[i]) step = -step;
    v[i] += step;
    simplex[i + 1] = clip(v, lower, upper);
    values[i + 1] = eval(simplex[i + 1]);
  }

  std::vector<int> order(n + 1);
  while (result.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    const int best = order.front(), worst = order.back(), second = order[n - 1];

    double spread = 0.0;
    for (int i = 0; i <= n; ++i) spread = std::max(spread, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
    if (std::abs(values[worst] - values[best]) <= options.f_tolerance && spread <= options.x_tolerance) {
      result.converged = true;
      break;
    }
    if (spread <= options.x_tolerance * 1e-3) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= n;

    const Eigen::VectorXd xr = clip(centroid + (centroid - simplex[worst]), lower, upper);
    const double fr = eval(xr);
    if (fr < values[best]) {
      const Eigen::VectorXd xe = clip(centroid + 2.0 * (centroid - simplex[worst]), lower, upper);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Eigen::VectorXd xc = outside ? clip(centroid + 0.5 * (xr - centroid), lower, upper)
                                       : clip(centroid + 0.5 * (simplex[worst] - centroid), lower, upper);
    const double fc = eval(xc);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      simplex[i] = clip(simplex[best] + 0.5 * (simplex[i] - simplex[best]), lower, upper);
      values[i] = eval(simplex[i]);
    }
  }

  const int best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  result.x = simplex[best];
  result.f = values[best];
  return result;
}

OptimResult minimize_bfgs_box(const ValueAndGradient& fg, const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& upper, const BfgsOptions& options) {
  const Eigen::Index n = x0.size();
  if (lower.size() != n || upper.size() != n) throw std::invalid_argument("minimize_bfgs_box: bound dimension mismatch");

  OptimResult result;
  Eigen::VectorXd x = clip(x0, lower, upper);
  Eigen::VectorXd g(n);
  double f = fg(x, g);
  ++result.evaluations;
  if (!std::isfinite(f) || !g.allFinite()) {
    result.x = x;
    result.f = kInf;
    return result;
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool h_is_identity = true;
  Eigen::VectorXd g_new(n);
  for (int it = 0; it < options.max_iterations; ++it) {
    // Variables pinned at a bound with the gradient pushing outward stay fixed.
    Eigen::VectorXd free = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)) free[i] = 0.0;
    }
    const Eigen::VectorXd g_free = g.cwiseProduct(free);
    if (g_free.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd d = -(h * g_free).cwiseProduct(free);
    if (d.dot(g_free) >= 0.0) {
      h.setIdentity();
      h_is_identity = true;
      d = -g_free;
    }

    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = kInf;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = clip(x + alpha * d, lower, upper);
      f_new = fg(x_new, g_new);
      ++result.evaluations;
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= f + 1e-4 * g.dot(x_new - x)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (h_is_identity) break;
      h.setIdentity();
      h_is_identity = true;
      continue;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double f_old = f;
    x = x_new;
    f = f_new;
    g = g_new;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      h = (eye - rho * s * y.transpose()) * h * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
      h_is_identity = false;
    }
    if (std::abs(f_old - f) <= options.f_tolerance * std::max(1.0, std::abs(f))) {
      result.converged = true;
      break;
    }
  }
  result.x = x;
  result.f = f;
  return result;
}

Eigen::VectorXd halton_point(std::uint64_t index, int dim) {
  static constexpr std::array<int, 16> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (dim < 1 || dim > static_cast<int>(kPrimes.size())) throw std::invalid_argument("halton_point: dim outside [1, 16]");
  Eigen::VectorXd point(dim);
  for (int k = 0; k < dim; ++k) {
    const auto base = static_cast<std::uint64_t>(kPrimes[k]);
    double inv = 1.0 / static_cast<double>(base), scale = inv, value = 0.0;
    for (std::uint64_t i = index; i > 0; i /= base) {
      value += static_cast<double>(i % base) * scale;
      scale *= inv;
    }
    point[k] = value;
  }
  return point;
}

}  // namespace virolfi
