#pragma once

// Boundary-layer problems on 0 < x < 1:
//   linear     eps y'' + y' - y  = 0,  y(0) = 1, y(1) = 0
//   nonlinear  eps y'' + y' + y^2 = 0, y(0) = 0, y(1) = 1/2

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asymptotica/core.hpp"
#include "asymptotica/ode.hpp"

namespace asymptotica::blayer {

enum class Kind { linear, nonlinear };

struct BvpProblem {
  double eps = 0.1;
  Kind kind = Kind::linear;
  double left = 1.0;   // y(0)
  double right = 0.0;  // y(1)

  static BvpProblem linear(double eps) { return {eps, Kind::linear, 1.0, 0.0}; }
  static BvpProblem nonlinear(double eps) { return {eps, Kind::nonlinear, 0.0, 0.5}; }
};

/// Two-term multiple-scales solution of the linear problem, written so that
/// e^{1/eps} is never formed.
double linear_blayer_multiscale(double x, double eps);

struct GridSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double residual = 0.0;  // max-norm of the h^2-scaled discrete equations
  int newton_iterations = 0;
};

/// Second-order centered differences on N uniform intervals. Linear problems
/// go through one tridiagonal solve; nonlinear ones through damped Newton
/// started from the solution of eps y'' + y' = 0 with the same boundary values.
GridSolution solve_bvp_fd(const BvpProblem& problem, Index n);

struct ShootingResult {
  double eps = 0.0;
  double b0 = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |F(B0)|
  double u0 = 0.0;        // u(0)
  double u_end = 0.0;     // u(1/eps)

  /// y(x) = u(x / eps), sampled by re-integrating the amplitude system.
  std::vector<double> sample(const std::vector<double>& x) const;
  double operator()(double x) const { return sample({x}).front(); }

  OdeOptions ode;
};

/// Shooting on B0 = B(0) with A(0) = -B0 + eps B0^2 / 2 so that u(0) = 0 holds
/// by construction, Newton (finite-difference derivative) on u(1/eps) = 1/2.
/// Throws SolverError when 50 iterations do not bring |F| below shoot_tol.
ShootingResult nonlinear_blayer_multiscale(double eps, double shoot_tol = 1e-10, double b0_seed = -1.0);

/// First x where the grid solution falls to half its left boundary value
/// (linear interpolation between nodes); NaN when it never does.
double half_width(const GridSolution& s);

}  // namespace asymptotica::blayer
