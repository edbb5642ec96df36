#pragma once

// Explicit Dormand-Prince 5(4) integrator with error control and
// fourth-order continuous extension on accepted steps.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asymptotica/core.hpp"

namespace asymptotica {

/// dy = f(t, y); dy arrives sized like y.
using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0: automatic
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  double smallest_step = std::numeric_limits<double>::infinity();
  double largest_step = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;  // column i is the state at times[i]
  OdeStats stats;
  double rtol = 0.0;
  double atol = 0.0;
  double eps = 0.0;
  std::string label;

  Index size() const { return static_cast<Index>(times.size()); }
  Eigen::VectorXd state(Index i) const { return states.col(i); }
};

/// Integrates y' = f(t, y) from t0 to t1 (t1 >= t0). With output_times empty
/// the trajectory holds every accepted step; otherwise it holds dense-output
/// samples at exactly those times, which must be nondecreasing inside [t0, t1].
/// Throws SolverError when the step size falls below 1e-14 * (t1 - t0) or the
/// step budget runs out.
Trajectory integrate_reference(const OdeRhs& f, const Eigen::VectorXd& y0, double t0, double t1,
                               const std::vector<double>& output_times = {},
                               const OdeOptions& options = {});

/// n uniformly spaced samples on [t0, t1], endpoints included.
std::vector<double> uniform_grid(double t0, double t1, Index n);

}  // namespace asymptotica
