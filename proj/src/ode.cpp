#include "asymptotica/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace asymptotica {

namespace {

// Dormand & Prince (1980) tableau; dense-output weights from Hairer's DOPRI5.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                  const OdeOptions& o) {
  const Eigen::ArrayXd scale = o.atol + o.rtol * y0.array().abs().max(y1.array().abs());
  return std::sqrt((err.array() / scale).square().mean());
}

double initial_step(const OdeRhs& f, double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                    double span, const OdeOptions& o, OdeStats& stats) {
  const Eigen::ArrayXd scale = o.atol + o.rtol * y0.array().abs();
  const double d0 = std::sqrt((y0.array() / scale).square().mean());
  const double d1n = std::sqrt((f0.array() / scale).square().mean());
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, span);
  Eigen::VectorXd y1 = y0 + h0 * f0;
  Eigen::VectorXd f1(y0.size());
  f(t0 + h0, y1, f1);
  ++stats.rhs_evals;
  const double d2 = std::sqrt(((f1 - f0).array() / scale).square().mean()) / h0;
  const double dmax = std::max(d1n, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5);
  return std::min({100 * h0, h1, span});
}

}  // namespace

std::vector<double> uniform_grid(double t0, double t1, Index n) {
  if (n < 2) throw std::invalid_argument("uniform_grid needs at least two samples");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = t1;
  return out;
}

Trajectory integrate_reference(const OdeRhs& f, const Eigen::VectorXd& y0, double t0, double t1,
                               const std::vector<double>& output_times, const OdeOptions& o) {
  if (!(o.rtol > 0) || !(o.atol > 0)) throw std::invalid_argument("tolerances must be positive");
  if (!(t1 >= t0)) throw std::invalid_argument("integration runs forward only");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    const double t = output_times[i];
    if (t < t0 || t > t1 || (i > 0 && t < output_times[i - 1])) {
      throw std::invalid_argument("output times must be nondecreasing inside the span");
    }
  }

  const Index n = y0.size();
  const bool dense = !output_times.empty();
  Trajectory out;
  out.rtol = o.rtol;
  out.atol = o.atol;
  std::vector<Eigen::VectorXd> samples;
  std::size_t next_out = 0;

  auto emit = [&](double t, const Eigen::VectorXd& y) {
    out.times.push_back(t);
    samples.push_back(y);
  };

  Eigen::VectorXd y = y0;
  double t = t0;
  if (dense) {
    while (next_out < output_times.size() && output_times[next_out] == t0) emit(output_times[next_out++], y);
  } else {
    emit(t0, y);
  }

  const double span = t1 - t0;
  if (span > 0) {
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    Eigen::VectorXd r1(n), r2(n), r3(n), r4(n), r5(n);
    f(t, y, k1);
    ++out.stats.rhs_evals;

    double h = o.initial_step > 0 ? o.initial_step : initial_step(f, t, y, k1, span, o, out.stats);
    h = std::min(h, o.max_step);
    const double h_floor = 1e-14 * span;
    bool last_rejected = false;
    long steps = 0;

    while (t < t1) {
      if (++steps > o.max_steps) throw SolverError("integrator exceeded its step budget");
      if (h < h_floor) {
        std::ostringstream msg;
        msg << "step size underflow: h = " << h << " at t = " << t << " (floor " << h_floor << ")";
        throw SolverError(msg.str());
      }
      bool final_step = false;
      if (t + h >= t1 || t + 1.01 * h >= t1) {
        h = t1 - t;
        final_step = true;
      }

      ytmp = y + h * a21 * k1;
      f(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      f(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(t + h, ytmp, k6);
      ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      const double t_new = final_step ? t1 : t + h;
      f(t_new, ynew, k7);
      out.stats.rhs_evals += 6;

      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double e = error_norm(err, y, ynew, o);
      if (!std::isfinite(e)) {
        ++out.stats.rejected;
        h *= 0.2;
        last_rejected = true;
        continue;
      }

      if (e <= 1.0) {
        ++out.stats.accepted;
        out.stats.smallest_step = std::min(out.stats.smallest_step, h);
        out.stats.largest_step = std::max(out.stats.largest_step, h);
        if (dense) {
          r1 = y;
          r2 = ynew - y;
          r3 = h * k1 - r2;
          r4 = r2 - h * k7 - r3;
          r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
          while (next_out < output_times.size() && output_times[next_out] <= t_new) {
            const double theta = (output_times[next_out] - t) / h;
            const double theta1 = 1.0 - theta;
            emit(output_times[next_out], r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5))));
            ++next_out;
          }
        } else {
          emit(t_new, ynew);
        }
        t = t_new;
        y = ynew;
        k1 = k7;
        double fac = e == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 10.0);
        if (last_rejected) fac = std::min(fac, 1.0);
        h = std::min(h * fac, o.max_step);
        last_rejected = false;
      } else {
        ++out.stats.rejected;
        h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
        last_rejected = true;
      }
    }
  }
  // output times equal to t1 that the final step could not reach through rounding
  while (dense && next_out < output_times.size()) emit(output_times[next_out++], y);

  out.states.resize(n, static_cast<Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) out.states.col(static_cast<Index>(i)) = samples[i];
  return out;
}

}  // namespace asymptotica
