#include "asymptotica/blayer.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace asymptotica::blayer {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("boundary-layer problems need 0 < eps < 1");
}

// Thomas algorithm: sub(i) y(i-1) + diag(i) y(i) + sup(i) y(i+1) = rhs(i)
Eigen::VectorXd thomas(const Eigen::VectorXd& sub, Eigen::VectorXd diag, const Eigen::VectorXd& sup,
                       Eigen::VectorXd rhs) {
  const Index n = diag.size();
  for (Index i = 1; i < n; ++i) {
    const double w = sub(i) / diag(i - 1);
    diag(i) -= w * sup(i - 1);
    rhs(i) -= w * rhs(i - 1);
  }
  Eigen::VectorXd y(n);
  y(n - 1) = rhs(n - 1) / diag(n - 1);
  for (Index i = n - 2; i >= 0; --i) y(i) = (rhs(i) - sup(i) * y(i + 1)) / diag(i);
  return y;
}

// h^2-scaled interior equations; entries 0 and n hold the boundary rows
Eigen::VectorXd residual(const BvpProblem& p, const Eigen::VectorXd& y, double h) {
  const Index n = y.size() - 1;
  Eigen::VectorXd r(n + 1);
  r(0) = y(0) - p.left;
  r(n) = y(n) - p.right;
  const double sign = p.kind == Kind::linear ? -1.0 : 1.0;
  for (Index i = 1; i < n; ++i) {
    const double source = p.kind == Kind::linear ? y(i) : y(i) * y(i);
    r(i) = p.eps * (y(i + 1) - 2.0 * y(i) + y(i - 1)) + 0.5 * h * (y(i + 1) - y(i - 1)) + sign * h * h * source;
  }
  return r;
}

struct Amplitudes {
  double a;
  double b;
};

Amplitudes initial_amplitudes(double b0, double eps) { return {-b0 + 0.5 * eps * b0 * b0, b0}; }

void amplitude_rhs(double eps, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
  const double a = s(0), b = s(1);
  ds(0) = -eps * a * a - 2.0 * eps * eps * a * a * a;
  ds(1) = 2.0 * eps * a * b + 2.0 * eps * eps * a * a * b;
}

double u_of(double xi, double a, double b, double eps) {
  const double e = std::exp(-xi);
  return a + b * e - 0.5 * eps * b * b * e * e;
}

Eigen::MatrixXd integrate_amplitudes(double eps, double b0, const std::vector<double>& xi, const OdeOptions& o) {
  const auto ic = initial_amplitudes(b0, eps);
  const Eigen::VectorXd s0 = (Eigen::VectorXd(2) << ic.a, ic.b).finished();
  auto rhs = [eps](double, const Eigen::VectorXd& s, Eigen::VectorXd& ds) { amplitude_rhs(eps, s, ds); };
  return integrate_reference(rhs, s0, 0.0, xi.back(), xi, o).states;
}

double shoot(double eps, double b0, const OdeOptions& o) {
  const double end = 1.0 / eps;
  const Eigen::MatrixXd s = integrate_amplitudes(eps, b0, {end}, o);
  return u_of(end, s(0, 0), s(1, 0), eps) - 0.5;
}

}  // namespace

double linear_blayer_multiscale(double x, double eps) {
  check_eps(eps);
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("x must lie in [0, 1]");
  // (1 - e^s)^{-1} e^{r} = -e^{r - s} / (1 - e^{-s}) with s = 2 - 2 eps + 1/eps
  const double s = 2.0 - 2.0 * eps + 1.0 / eps;
  if (!std::isfinite(s)) throw std::domain_error("eps too small for the rewritten closed form");
  const double denom = -std::expm1(-s);
  return (-std::exp((1.0 - eps) * x - s) + std::exp((-1.0 + eps - 1.0 / eps) * x)) / denom;
}

GridSolution solve_bvp_fd(const BvpProblem& p, Index n) {
  check_eps(p.eps);
  if (n < 64) throw std::invalid_argument("solve_bvp_fd needs N >= 64");
  const double h = 1.0 / static_cast<double>(n);
  GridSolution out;
  out.x = Eigen::VectorXd::LinSpaced(n + 1, 0.0, 1.0);

  Eigen::VectorXd sub = Eigen::VectorXd::Zero(n + 1), diag = Eigen::VectorXd::Zero(n + 1),
                  sup = Eigen::VectorXd::Zero(n + 1);
  diag(0) = 1.0;
  diag(n) = 1.0;
  for (Index i = 1; i < n; ++i) {
    sub(i) = p.eps - 0.5 * h;
    sup(i) = p.eps + 0.5 * h;
  }

  if (p.kind == Kind::linear) {
    for (Index i = 1; i < n; ++i) diag(i) = -2.0 * p.eps - h * h;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(0) = p.left;
    rhs(n) = p.right;
    out.y = thomas(sub, diag, sup, rhs);
    out.y(0) = p.left;
    out.y(n) = p.right;
    out.residual = residual(p, out.y, h).cwiseAbs().maxCoeff();
    return out;
  }

  // eps y'' + y' = 0 with the same boundary values
  const double decay = -std::expm1(-1.0 / p.eps);
  Eigen::VectorXd y(n + 1);
  for (Index i = 0; i <= n; ++i) {
    const double layer = -std::expm1(-out.x(i) / p.eps) / decay;
    y(i) = p.left + (p.right - p.left) * layer;
  }
  y(0) = p.left;
  y(n) = p.right;

  Eigen::VectorXd r = residual(p, y, h);
  double norm = r.cwiseAbs().maxCoeff();
  const double target = 1e-12;
  int iter = 0;
  for (; iter < 100 && norm > target; ++iter) {
    for (Index i = 1; i < n; ++i) diag(i) = -2.0 * p.eps + 2.0 * h * h * y(i);
    const Eigen::VectorXd step = thomas(sub, diag, sup, -r);
    double lambda = 1.0;
    for (;;) {
      const Eigen::VectorXd trial = y + lambda * step;
      const Eigen::VectorXd rt = residual(p, trial, h);
      const double nt = rt.cwiseAbs().maxCoeff();
      if (nt < norm || lambda < 1e-4) {
        y = trial;
        r = rt;
        norm = nt;
        break;
      }
      lambda *= 0.5;
    }
  }
  if (norm > target) {
    std::ostringstream msg;
    msg << "finite-difference Newton did not converge: residual " << norm << " after " << iter << " iterations";
    throw SolverError(msg.str());
  }
  out.y = y;
  out.residual = norm;
  out.newton_iterations = iter;
  return out;
}

ShootingResult nonlinear_blayer_multiscale(double eps, double shoot_tol, double b0_seed) {
  if (!(eps > 0.0 && eps <= 0.2)) throw std::invalid_argument("nonlinear shooting supports 0 < eps <= 0.2");
  if (!(shoot_tol > 0.0)) throw std::invalid_argument("shoot_tol must be positive");
  ShootingResult res;
  res.eps = eps;
  res.ode.rtol = 1e-10;
  res.ode.atol = 1e-12;

  double b0 = b0_seed;
  double f = shoot(eps, b0, res.ode);
  int iter = 0;
  while (std::abs(f) > shoot_tol) {
    if (++iter > 50) {
      std::ostringstream msg;
      msg << "shooting on B0 did not converge in 50 iterations (|F| = " << std::abs(f) << ", B0 = " << b0 << ")";
      throw SolverError(msg.str());
    }
    const double h = 1e-7 * std::max(1.0, std::abs(b0));
    const double slope = (shoot(eps, b0 + h, res.ode) - shoot(eps, b0 - h, res.ode)) / (2.0 * h);
    if (slope == 0.0 || !std::isfinite(slope)) throw SolverError("shooting derivative vanished");
    b0 -= f / slope;
    f = shoot(eps, b0, res.ode);
  }
  res.b0 = b0;
  res.iterations = iter;
  res.residual = std::abs(f);
  const auto ic = initial_amplitudes(b0, eps);
  res.u0 = u_of(0.0, ic.a, ic.b, eps);
  res.u_end = f + 0.5;
  return res;
}

std::vector<double> ShootingResult::sample(const std::vector<double>& x) const {
  std::vector<double> xi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw std::invalid_argument("x must lie in [0, 1]");
    if (i > 0 && x[i] < x[i - 1]) throw std::invalid_argument("sample points must be nondecreasing");
    xi[i] = x[i] / eps;
  }
  std::vector<double> out(x.size());
  if (x.empty()) return out;
  const Eigen::MatrixXd s = integrate_amplitudes(eps, b0, xi, ode);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = u_of(xi[i], s(0, static_cast<Index>(i)), s(1, static_cast<Index>(i)), eps);
  }
  return out;
}

double half_width(const GridSolution& s) {
  const double half = 0.5 * s.y(0);
  for (Index i = 1; i < s.y.size(); ++i) {
    if ((s.y(i) - half) * (s.y(0) - half) <= 0.0) {
      const double t = (half - s.y(i - 1)) / (s.y(i) - s.y(i - 1));
      return s.x(i - 1) + t * (s.x(i) - s.x(i - 1));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace asymptotica::blayer
