#include "asymptotica/msode.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace asymptotica::msode {

namespace {

constexpr Complex I{0.0, 1.0};

Complex amp(const VectorXd& a, Index k) { return {a(2 * k), a(2 * k + 1)}; }

void set_amp(VectorXd& a, Index k, Complex z) {
  a(2 * k) = z.real();
  a(2 * k + 1) = z.imag();
}

CaseSpec make_damped_linear() {
  CaseSpec c;
  c.name = "damped_linear";
  c.dimension = 2;
  c.amplitude_size = 2;
  c.components = {"y"};
  c.validity_exponent = 3;
  c.max_terms = 2;
  c.default_initial_state = (VectorXd(2) << 1.0, 0.0).finished();
  c.original_rhs = [](double, const VectorXd& s, double eps, VectorXd& ds) {
    ds(0) = s(1);
    ds(1) = -eps * s(1) - s(0);
  };
  auto rate = [](double eps, int terms) {
    return Complex(-0.5 * eps, 0.0) - (terms >= 2 ? I * (eps * eps / 8.0) : Complex(0.0));
  };
  c.amplitude_rhs = [rate](double, const VectorXd& a, double eps, int terms, VectorXd& da) {
    set_amp(da, 0, rate(eps, terms) * amp(a, 0));
  };
  c.reconstruct = [rate](double t, const VectorXd& a, double eps, int terms) {
    const Complex A = amp(a, 0);
    const Complex dA = rate(eps, terms) * A;
    const Complex e = std::exp(I * t);
    return (VectorXd(2) << 2.0 * (A * e).real(), 2.0 * ((dA + I * A) * e).real()).finished();
  };
  c.exact = [](double t, double eps) {
    if (eps >= 2.0) throw std::domain_error("damped_linear closed form needs eps < 2");
    const Complex lambda(-0.5 * eps, std::sqrt(1.0 - eps * eps / 4.0));
    const Complex C = -std::conj(lambda) / (lambda - std::conj(lambda));
    const Complex e = C * std::exp(lambda * t);
    return (VectorXd(2) << 2.0 * e.real(), 2.0 * (lambda * e).real()).finished();
  };
  c.amplitude_closed_form = [rate](double t, const VectorXd& a0, double eps, int terms) {
    VectorXd a(2);
    set_amp(a, 0, amp(a0, 0) * std::exp(rate(eps, terms) * t));
    return a;
  };
  return c;
}

CaseSpec make_cubic() {
  CaseSpec c;
  c.name = "cubic";
  c.dimension = 2;
  c.amplitude_size = 2;
  c.components = {"y"};
  c.validity_exponent = 3;
  c.max_terms = 2;
  c.default_initial_state = (VectorXd(2) << 1.0, 0.0).finished();
  c.original_rhs = [](double, const VectorXd& s, double eps, VectorXd& ds) {
    ds(0) = s(1);
    ds(1) = -s(0) + eps * s(0) * s(0) * s(0);
  };
  // dA/dt = -i w(|A|^2) A
  auto shift = [](double m2, double eps, int terms) {
    return 1.5 * eps * m2 + (terms >= 2 ? 15.0 / 16.0 * eps * eps * m2 * m2 : 0.0);
  };
  c.amplitude_rhs = [shift](double, const VectorXd& a, double eps, int terms, VectorXd& da) {
    const Complex A = amp(a, 0);
    set_amp(da, 0, -I * shift(std::norm(A), eps, terms) * A);
  };
  c.reconstruct = [shift](double t, const VectorXd& a, double eps, int terms) {
    const Complex A = amp(a, 0);
    const Complex dA = -I * shift(std::norm(A), eps, terms) * A;
    const Complex e1 = std::exp(I * t);
    Complex z = A * e1;
    Complex dz = (dA + I * A) * e1;
    if (terms >= 2) {
      const Complex e3 = std::exp(3.0 * I * t);
      z -= eps / 8.0 * A * A * A * e3;
      dz -= eps / 8.0 * (3.0 * A * A * dA + 3.0 * I * A * A * A) * e3;
    }
    return (VectorXd(2) << 2.0 * z.real(), 2.0 * dz.real()).finished();
  };
  c.amplitude_closed_form = [shift](double t, const VectorXd& a0, double eps, int terms) {
    const Complex A0 = amp(a0, 0);
    VectorXd a(2);
    set_amp(a, 0, A0 * std::exp(-I * shift(std::norm(A0), eps, terms) * t));
    return a;
  };
  return c;
}

CaseSpec make_quadratic_damped() {
  CaseSpec c;
  c.name = "quadratic_damped";
  c.dimension = 2;
  c.amplitude_size = 2;  // real A, B
  c.components = {"y"};
  c.validity_exponent = 3;
  c.max_terms = 2;
  c.default_initial_state = (VectorXd(2) << 1.0, -0.5).finished();
  c.original_rhs = [](double, const VectorXd& s, double eps, VectorXd& ds) {
    ds(0) = s(1);
    ds(1) = -s(1) - eps * s(0) * s(0);
  };
  c.amplitude_rhs = [](double, const VectorXd& a, double eps, int terms, VectorXd& da) {
    const double A = a(0), B = a(1);
    da(0) = -eps * A * A - (terms >= 2 ? 2.0 * eps * eps * A * A * A : 0.0);
    da(1) = 2.0 * eps * A * B + (terms >= 2 ? 2.0 * eps * eps * A * A * B : 0.0);
  };
  c.reconstruct = [c](double t, const VectorXd& a, double eps, int terms) {
    VectorXd da(2);
    c.amplitude_rhs(t, a, eps, terms, da);
    const double A = a(0), B = a(1), dA = da(0), dB = da(1);
    const double e1 = std::exp(-t);
    double y = A + B * e1;
    double dy = dA + (dB - B) * e1;
    if (terms >= 2) {
      const double e2 = e1 * e1;
      y -= 0.5 * eps * B * B * e2;
      dy -= 0.5 * eps * (2.0 * B * dB - 2.0 * B * B) * e2;
    }
    return (VectorXd(2) << y, dy).finished();
  };
  return c;
}

CaseSpec make_coupled_cubic() {
  CaseSpec c;
  c.name = "coupled_cubic";
  c.dimension = 4;
  c.amplitude_size = 4;
  c.components = {"x", "y"};
  c.validity_exponent = 2;
  c.max_terms = 1;
  c.default_initial_state = (VectorXd(4) << 1.2, 0.0, -0.6, 0.0).finished();
  c.original_rhs = [](double, const VectorXd& s, double eps, VectorXd& ds) {
    const double x = s(0), y = s(2);
    ds(0) = s(1);
    ds(1) = -2.0 * x + y + eps * x * y * y;
    ds(2) = s(3);
    ds(3) = -3.0 * y + 2.0 * x + eps * y * x * x;
  };
  auto rates = [](double ma2, double mb2, double eps) {
    return std::pair{0.5 * eps * (3.0 * ma2 - 2.0 * mb2), 0.5 * eps * (3.0 * mb2 - ma2)};
  };
  c.amplitude_rhs = [rates](double, const VectorXd& a, double eps, int, VectorXd& da) {
    const Complex A = amp(a, 0), B = amp(a, 1);
    const auto [ra, rb] = rates(std::norm(A), std::norm(B), eps);
    set_amp(da, 0, I * ra * A);
    set_amp(da, 1, I * rb * B);
  };
  c.reconstruct = [rates](double t, const VectorXd& a, double eps, int) {
    const Complex A = amp(a, 0), B = amp(a, 1);
    const auto [ra, rb] = rates(std::norm(A), std::norm(B), eps);
    const Complex e1 = std::exp(-I * t), e2 = std::exp(-2.0 * I * t);
    const Complex pa = A * e1, pb = B * e2;
    const Complex dpa = (I * ra - I) * A * e1, dpb = (I * rb - 2.0 * I) * B * e2;
    VectorXd s(4);
    s << 2.0 * (pa + pb).real(), 2.0 * (dpa + dpb).real(), 2.0 * (pa - 2.0 * pb).real(),
        2.0 * (dpa - 2.0 * dpb).real();
    return s;
  };
  c.amplitude_closed_form = [rates](double t, const VectorXd& a0, double eps, int) {
    const Complex A0 = amp(a0, 0), B0 = amp(a0, 1);
    const auto [ra, rb] = rates(std::norm(A0), std::norm(B0), eps);
    VectorXd a(4);
    set_amp(a, 0, A0 * std::exp(I * ra * t));
    set_amp(a, 1, B0 * std::exp(I * rb * t));
    return a;
  };
  return c;
}

const std::map<std::string, CaseSpec>& registry() {
  static const std::map<std::string, CaseSpec> cases = [] {
    std::map<std::string, CaseSpec> m;
    for (auto c : {make_damped_linear(), make_cubic(), make_quadratic_damped(), make_coupled_cubic()}) {
      m.emplace(c.name, std::move(c));
    }
    return m;
  }();
  return cases;
}

void check_terms(const CaseSpec& c, int terms) {
  if (terms < 1 || terms > c.max_terms) {
    throw std::invalid_argument("case '" + c.name + "' supports terms in 1.." + std::to_string(c.max_terms));
  }
}

VectorXd newton_fit(const CaseSpec& c, const VectorXd& ics, double eps, int terms, VectorXd a, double tol) {
  const Index m = c.amplitude_size;
  for (int iter = 0; iter < 50; ++iter) {
    const VectorXd r = c.reconstruct(0.0, a, eps, terms) - ics;
    if (r.cwiseAbs().maxCoeff() <= tol) return a;
    MatrixXd jac(r.size(), m);
    for (Index j = 0; j < m; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(a(j)));
      VectorXd ap = a, am = a;
      ap(j) += h;
      am(j) -= h;
      jac.col(j) = (c.reconstruct(0.0, ap, eps, terms) - c.reconstruct(0.0, am, eps, terms)) / (2.0 * h);
    }
    a -= jac.colPivHouseholderQr().solve(r);
  }
  const VectorXd r = c.reconstruct(0.0, a, eps, terms) - ics;
  if (r.cwiseAbs().maxCoeff() <= tol) return a;
  throw SolverError("initial-amplitude Newton iteration for '" + c.name +
                    "' did not converge in 50 iterations (residual " +
                    std::to_string(r.cwiseAbs().maxCoeff()) + ")");
}

}  // namespace

const CaseSpec& catalog(const std::string& name) {
  const auto& r = registry();
  auto it = r.find(name);
  if (it == r.end()) throw std::invalid_argument("unknown multiple-scales case '" + name + "'");
  return it->second;
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

Trajectory integrate_reference(const CaseSpec& c, const VectorXd& y0, double t0, double t1, double eps,
                               const std::vector<double>& output_times, const OdeOptions& options) {
  if (y0.size() != c.dimension) throw std::invalid_argument("initial state has the wrong size");
  auto rhs = [&c, eps](double t, const VectorXd& s, VectorXd& ds) { c.original_rhs(t, s, eps, ds); };
  Trajectory tr = asymptotica::integrate_reference(rhs, y0, t0, t1, output_times, options);
  tr.eps = eps;
  tr.label = c.name;
  return tr;
}

Trajectory integrate_amplitude(const CaseSpec& c, const VectorXd& a0, double t0, double t1, double eps,
                               int terms, const std::vector<double>& output_times, const OdeOptions& options,
                               bool use_closed_form) {
  check_terms(c, terms);
  if (a0.size() != c.amplitude_size) throw std::invalid_argument("amplitude vector has the wrong size");
  Trajectory tr;
  if (use_closed_form) {
    if (!c.amplitude_closed_form) throw std::invalid_argument("case '" + c.name + "' has no closed-form amplitudes");
    const std::vector<double> times = output_times.empty() ? std::vector<double>{t0, t1} : output_times;
    tr.times = times;
    tr.states.resize(a0.size(), static_cast<Index>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
      tr.states.col(static_cast<Index>(i)) = c.amplitude_closed_form(times[i] - t0, a0, eps, terms);
    }
  } else {
    auto rhs = [&c, eps, terms](double t, const VectorXd& a, VectorXd& da) { c.amplitude_rhs(t, a, eps, terms, da); };
    tr = asymptotica::integrate_reference(rhs, a0, t0, t1, output_times, options);
  }
  tr.eps = eps;
  tr.label = c.name + "/amplitudes";
  return tr;
}

VectorXd fit_initial_amplitudes(const CaseSpec& c, const VectorXd& ics, double eps, int terms, double newton_tol) {
  check_terms(c, terms);
  if (ics.size() != c.dimension) throw std::invalid_argument("initial state has the wrong size");
  if (!(newton_tol > 0)) throw std::invalid_argument("newton_tol must be positive");
  VectorXd a = newton_fit(c, ics, 0.0, terms, VectorXd::Zero(c.amplitude_size), newton_tol);
  if (eps != 0.0) a = newton_fit(c, ics, eps, terms, a, newton_tol);
  return a;
}

double naive_damped_expansion(double t, double eps) {
  return std::cos(t) + 0.5 * eps * (-std::sin(t) - t * std::cos(t));
}

RunReport compare_horizon(const CaseSpec& c, double eps, double horizon, const CompareOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  check_terms(c, o.terms);
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive and finite");
  if (o.samples < 2) throw std::invalid_argument("need at least two output samples");

  RunReport rep;
  rep.case_name = c.name;
  rep.eps = eps;
  rep.horizon = horizon;
  rep.terms = o.terms;
  rep.reference = o.reference;
  rep.initial_state = o.initial_state ? *o.initial_state : c.default_initial_state;
  if (rep.initial_state.size() != c.dimension) throw std::invalid_argument("initial state has the wrong size");

  rep.times = uniform_grid(0.0, horizon, o.samples);
  const Index n = o.samples;
  const Index nc = c.component_count();

  OdeOptions ode;
  ode.rtol = o.rtol;
  ode.atol = o.atol;

  rep.amplitudes0 = fit_initial_amplitudes(c, rep.initial_state, eps, o.terms, o.newton_tol);

  MatrixXd ref_states(c.dimension, n);
  if (o.reference == Reference::exact) {
    if (!c.exact) throw std::invalid_argument("case '" + c.name + "' has no closed-form solution");
    if (!rep.initial_state.isApprox(c.default_initial_state, 0.0)) {
      throw std::invalid_argument("the closed form is tied to the case's default initial state");
    }
    for (Index i = 0; i < n; ++i) ref_states.col(i) = c.exact(rep.times[static_cast<std::size_t>(i)], eps);
  } else {
    const Trajectory direct = integrate_reference(c, rep.initial_state, 0.0, horizon, eps, rep.times, ode);
    ref_states = direct.states;
    rep.reference_stats = direct.stats;
  }

  const Trajectory amps = integrate_amplitude(c, rep.amplitudes0, 0.0, horizon, eps, o.terms, rep.times, ode,
                                              o.closed_form_amplitudes);
  rep.amplitude_stats = amps.stats;

  rep.reference_values.resize(nc, n);
  rep.multiscale_values.resize(nc, n);
  for (Index i = 0; i < n; ++i) {
    const VectorXd s = c.reconstruct(rep.times[static_cast<std::size_t>(i)], amps.states.col(i), eps, o.terms);
    for (Index k = 0; k < nc; ++k) {
      rep.reference_values(k, i) = ref_states(2 * k, i);
      rep.multiscale_values(k, i) = s(2 * k);
    }
  }
  rep.abs_error = (rep.reference_values - rep.multiscale_values).cwiseAbs();
  rep.max_abs_error = rep.abs_error.rowwise().maxCoeff();
  rep.l2_error = (rep.abs_error.array().square().rowwise().sum() / static_cast<double>(n)).sqrt().matrix();
  rep.max_error = rep.max_abs_error.maxCoeff();
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

RunReport compare(const CaseSpec& c, double eps, double horizon_exponent, const CompareOptions& options) {
  if (horizon_exponent > c.validity_exponent + 1) {
    throw std::invalid_argument("horizon exponent exceeds the case's validity exponent by more than one");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("an eps-scaled horizon needs eps > 0");
  return compare_horizon(c, eps, std::pow(eps, -horizon_exponent), options);
}

SpectralPeak spectral_peak(const std::vector<double>& samples, double dt, double w_lo, double w_hi) {
  const std::size_t n = samples.size();
  if (n < 8) throw std::invalid_argument("spectral_peak needs at least 8 samples");
  std::vector<double> windowed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    windowed[i] = samples[i] * w;
  }
  Eigen::FFT<double> fft;
  std::vector<Complex> spectrum;
  fft.fwd(spectrum, windowed);
  const double bin = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
  SpectralPeak peak{0.0, bin};
  double best = -1.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double w = bin * static_cast<double>(k);
    if (w < w_lo || w > w_hi) continue;
    if (std::abs(spectrum[k]) > best) {
      best = std::abs(spectrum[k]);
      peak.omega = w;
    }
  }
  if (best < 0) throw std::invalid_argument("no FFT bin inside the requested band");
  return peak;
}

std::pair<double, double> coupled_frequencies(double abs_a, double abs_b, double eps) {
  const double a2 = abs_a * abs_a, b2 = abs_b * abs_b;
  return {1.0 + eps * (b2 - 1.5 * a2), 2.0 + eps * (0.5 * a2 - 1.5 * b2)};
}

}  // namespace asymptotica::msode
