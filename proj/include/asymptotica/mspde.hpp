#pragma once

// Wave packets for two periodic 1D dispersive equations:
//   klein_gordon  u_tt - u_xx + u = eps u^2
//   fourth_order  u_tt + u_xx + u_xxxx + u = eps u^3
// Direct pseudospectral solvers, split-step amplitude solvers, reconstruction
// of the field from its envelope, and phase-matching analysis.

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "asymptotica/core.hpp"
#include "asymptotica/ode.hpp"

namespace asymptotica::mspde {

enum class Kind { klein_gordon, fourth_order };

Kind parse_kind(std::string_view name);
std::string kind_name(Kind kind);

struct Dispersion {
  Kind kind = Kind::klein_gordon;

  double omega(double k) const;
  double group_velocity(double k) const;  // omega'
  double curvature(double k) const;       // omega''
  /// omega^2, the symbol of the linear spatial operator.
  double symbol(double k) const;
  /// Degree of the nonlinearity: 2 or 3.
  int degree() const { return kind == Kind::klein_gordon ? 2 : 3; }
};

/// omega(n k) - n omega(k).
double phase_match_residual(const Dispersion& d, int n, double k);

/// Roots of the phase-match residual on [k_lo, k_hi]: sign changes on a
/// uniform grid of `cells` intervals, refined by bisection to 1e-12 or better.
std::vector<double> find_phase_matched(const Dispersion& d, int n, double k_lo, double k_hi,
                                       Index cells = 4096);

/// Uniform periodic grid on [0, length).
struct Grid {
  double length = 0.0;
  Index size = 0;

  Grid(double length, Index size);
  Eigen::VectorXd x() const;
  /// FFT-ordered wavenumbers; the Nyquist entry is zero.
  Eigen::VectorXd wavenumbers() const;
  double dx() const { return length / static_cast<double>(size); }
};

struct RealField {
  double length = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd ut;
};

struct WavePacketField {
  double length = 0.0;
  Eigen::VectorXcd a;
  double k = 1.0;  // carrier, an integer multiple of 2 pi / length
  double eps = 0.0;
  Kind kind = Kind::klein_gordon;
};

/// Highest retained mode index for the dealiased products: N/3 for quadratic,
/// N/4 for cubic nonlinearities.
Index dealias_cutoff(Kind kind, Index n);

/// Zeroes every Fourier mode of u and ut above the dealiasing cutoff.
RealField dealias(Kind kind, const RealField& f);

/// Hamiltonian of the direct equation on the grid.
double field_energy(Kind kind, double eps, const RealField& f);

struct DirectResult {
  std::vector<double> times;
  std::vector<RealField> snapshots;
  std::vector<double> energy;
  double max_energy_drift = 0.0;  // relative to the initial energy
  OdeStats stats;
};

/// Dealiases the initial data, then integrates the semi-discrete system with
/// the adaptive Dormand-Prince integrator, sampling at `times` (nondecreasing,
/// all >= 0).
DirectResult solve_direct(Kind kind, double eps, const RealField& initial,
                          const std::vector<double>& times, double rtol = 1e-10);
DirectResult solve_kg_direct(double eps, const RealField& initial, const std::vector<double>& times,
                             double rtol = 1e-10);
DirectResult solve_fourth_direct(double eps, const RealField& initial,
                                 const std::vector<double>& times, double rtol = 1e-10);

/// A_t = -v A_x + (i beta / 2) A_xx + i gamma |A|^2 A.
struct NlsCoefficients {
  double velocity = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// klein_gordon: v = omega', beta = omega'' = 1/omega^3, gamma = 5 eps^2 / (3 omega).
/// fourth_order: v = omega', beta = 0, gamma = 3 eps / (2 omega).
NlsCoefficients nls_coefficients(Kind kind, double k, double eps);

/// Strang splitting with an exact linear flow in Fourier space and an exact
/// pointwise phase rotation for the cubic term, using ceil(t_end / dt) equal
/// steps.
WavePacketField solve_nls(const WavePacketField& field, double t_end, double dt,
                          bool nonlinear = true);

/// Right-hand side of the amplitude equation, evaluated spectrally.
Eigen::VectorXcd amplitude_rate(const WavePacketField& field);

/// Integral of |A|^2 over the period.
double mass(const WavePacketField& field);

/// Centroid of |A|^2 (first moment over the grid, no unwrapping).
double centroid(const WavePacketField& field);

/// Free-space solution of the linear amplitude equation from the Gaussian
/// a exp(-(x - xc)^2 / (2 sigma^2)).
Eigen::VectorXcd linear_gaussian(const Grid& grid, Complex a, double xc, double sigma,
                                 double velocity, double beta, double t);

/// A exp(i theta) + conj at order 0; order 1 adds the eps h1 correction
/// built from omega(n k)^2 - n^2 omega(k)^2. ut is exact given A_t from the
/// amplitude equation.
RealField reconstruct_field(const WavePacketField& field, double t, int order);

/// Phase-matched pair: A at k and B at 3k on the fourth-order equation.
struct TwoWave {
  Eigen::VectorXcd a;
  Eigen::VectorXcd b;
};

/// Pointwise nonlinear rates of the two-wave system:
///   A_t = eps (-3|A|^2 A - 6|B|^2 A - 3 conj(A)^2 B) / (2 i omega(k))
///   B_t = eps (-3|B|^2 B - 6|A|^2 B - A^3) / (2 i omega(3k))
TwoWave two_wave_rate(double k, double eps, const TwoWave& s);

/// Strang splitting with ceil(t_end / dt) equal steps: exact advection of each
/// wave at its own group velocity, one classical RK4 step for the coupled
/// cubic terms. Throws std::invalid_argument unless k is phase matched to 1e-6.
TwoWave solve_two_wave(double length, double k, double eps, TwoWave state, double t_end, double dt);

struct PacketOptions {
  Kind kind = Kind::klein_gordon;
  double eps = 0.1;
  double k = 1.0;
  double amplitude = 0.5;
  double sigma_wavelengths = 10.0;  // sigma / (2 pi / k), at least 10
  Index periods = 128;              // domain length in carrier wavelengths
  Index points = 2048;              // power of two
  double center = -1.0;             // < 0: centred on the travelled span
  std::vector<double> checkpoints{5.0, 10.0, 50.0};
  int order = 1;
  double rtol = 1e-10;
  double nls_dt = 0.01;
};

struct PacketCheckpoint {
  double t = 0.0;
  double rel_l2 = 0.0;
  RealField direct;
  RealField reconstructed;
};

struct PacketReport {
  PacketOptions options;
  Eigen::VectorXd x;
  double length = 0.0;
  double center = 0.0;
  std::vector<PacketCheckpoint> checkpoints;
  double energy_drift = 0.0;
  double mass_drift = 0.0;
  OdeStats stats;
  double wall_seconds = 0.0;
};

/// Starts the direct solver from the reconstruction at t = 0 and compares it
/// with the reconstruction of the evolved envelope at each checkpoint.
PacketReport packet_compare(const PacketOptions& options);

}  // namespace asymptotica::mspde
