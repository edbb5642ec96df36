#pragma once

// Multiple-scales catalog for weakly nonlinear ODEs: each case bundles the
// original system, its amplitude equations, the reconstruction map and an
// optional closed form, plus the machinery to compare them.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asymptotica/core.hpp"
#include "asymptotica/ode.hpp"

namespace asymptotica::msode {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One catalog entry. The original state stacks (value, derivative) per
/// observable component; complex amplitudes are stored as (re, im) pairs.
/// `terms` selects the truncation: 1 keeps the O(eps) amplitude equation and
/// the leading reconstruction, 2 adds the next order to both.
struct CaseSpec {
  std::string name;
  Index dimension = 0;
  Index amplitude_size = 0;
  std::vector<std::string> components;
  int validity_exponent = 0;
  int max_terms = 1;
  VectorXd default_initial_state;

  std::function<void(double t, const VectorXd& s, double eps, VectorXd& ds)> original_rhs;
  std::function<void(double t, const VectorXd& a, double eps, int terms, VectorXd& da)> amplitude_rhs;
  /// Original-layout state (values and exact time derivatives) from amplitudes.
  std::function<VectorXd(double t, const VectorXd& a, double eps, int terms)> reconstruct;
  /// Closed-form solution of the original problem from default_initial_state.
  std::function<VectorXd(double t, double eps)> exact;
  /// Closed-form amplitude flow a(t) from a(0).
  std::function<VectorXd(double t, const VectorXd& a0, double eps, int terms)> amplitude_closed_form;

  Index component_count() const { return static_cast<Index>(components.size()); }
};

/// Registered names: damped_linear, cubic, quadratic_damped, coupled_cubic.
const CaseSpec& catalog(const std::string& name);
std::vector<std::string> catalog_names();

/// Original system from y0 on [t0, t1].
Trajectory integrate_reference(const CaseSpec& c, const VectorXd& y0, double t0, double t1, double eps,
                               const std::vector<double>& output_times, const OdeOptions& options);

/// Amplitude flow from a0; with use_closed_form the case's exact amplitude
/// solution is sampled instead (throws if the case has none).
Trajectory integrate_amplitude(const CaseSpec& c, const VectorXd& a0, double t0, double t1, double eps,
                               int terms, const std::vector<double>& output_times,
                               const OdeOptions& options, bool use_closed_form = false);

/// Newton iteration (finite-difference Jacobian) for amplitudes whose
/// reconstruction at t = 0 reproduces `ics`, started from the eps = 0 fit.
/// Throws SolverError after 50 iterations without reaching newton_tol.
VectorXd fit_initial_amplitudes(const CaseSpec& c, const VectorXd& ics, double eps, int terms,
                                double newton_tol = 1e-12);

/// The straightforward expansion of y'' + eps y' + y = 0, y(0) = 1, y'(0) = 0,
/// that breaks down for t ~ 1/eps.
double naive_damped_expansion(double t, double eps);

enum class Reference { direct, exact };

struct CompareOptions {
  int terms = 2;
  double rtol = 1e-10;
  double atol = 1e-12;
  double newton_tol = 1e-12;
  Index samples = 2048;
  Reference reference = Reference::direct;
  bool closed_form_amplitudes = false;
  std::optional<VectorXd> initial_state;  // default: the case's
};

struct RunReport {
  std::string case_name;
  double eps = 0.0;
  double horizon = 0.0;
  int terms = 0;
  Reference reference = Reference::direct;
  VectorXd initial_state;
  VectorXd amplitudes0;
  std::vector<double> times;
  MatrixXd reference_values;   // component x sample
  MatrixXd multiscale_values;  // component x sample
  MatrixXd abs_error;          // component x sample
  VectorXd max_abs_error;      // per component
  VectorXd l2_error;           // per component, root mean square over samples
  double max_error = 0.0;      // over all components
  OdeStats reference_stats;
  OdeStats amplitude_stats;
  double wall_seconds = 0.0;
};

/// Direct (or exact) versus multiscale on a uniform grid over [0, horizon].
RunReport compare_horizon(const CaseSpec& c, double eps, double horizon, const CompareOptions& options = {});

/// Same, with horizon eps^-horizon_exponent; the exponent may exceed the
/// case's validity exponent by at most one.
RunReport compare(const CaseSpec& c, double eps, double horizon_exponent, const CompareOptions& options = {});

/// Peak angular frequency of a uniformly sampled real signal within
/// [w_lo, w_hi], from a Hann-windowed FFT; also returns the bin width.
struct SpectralPeak {
  double omega = 0.0;
  double bin_width = 0.0;
};
SpectralPeak spectral_peak(const std::vector<double>& samples, double dt, double w_lo, double w_hi);

/// Frequencies of the two normal modes of the coupled cubic oscillators for
/// amplitudes A(0), B(0), with the eps carried by the amplitude equations.
std::pair<double, double> coupled_frequencies(double abs_a, double abs_b, double eps);

}  // namespace asymptotica::msode
