#include "asymptotica/mspde.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace asymptotica::mspde {

using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

constexpr Complex I{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

bool is_power_of_two(Index n) { return n >= 2 && (n & (n - 1)) == 0; }

// Thin wrapper so every transform uses the same scaled inverse.
struct Spectral {
  Eigen::FFT<double> fft;

  VectorXcd forward(const VectorXcd& f) {
    VectorXcd out(f.size());
    fft.fwd(out, f);
    return out;
  }
  VectorXcd forward(const VectorXd& f) { return forward(VectorXcd(f.cast<Complex>())); }
  VectorXcd inverse(const VectorXcd& f) {
    VectorXcd out(f.size());
    fft.inv(out, f);
    return out;
  }
};

Eigen::Array<bool, Eigen::Dynamic, 1> band_mask(Kind kind, Index n) {
  const Index cut = dealias_cutoff(kind, n);
  Eigen::Array<bool, Eigen::Dynamic, 1> keep(n);
  for (Index j = 0; j < n; ++j) {
    const Index m = j <= n / 2 ? j : n - j;
    keep(j) = m <= cut && !(j == n / 2);
  }
  return keep;
}

VectorXcd apply_mask(VectorXcd f, const Eigen::Array<bool, Eigen::Dynamic, 1>& keep) {
  for (Index j = 0; j < f.size(); ++j)
    if (!keep(j)) f(j) = 0.0;
  return f;
}

void check_field(const VectorXd& u, const VectorXd& ut, double length) {
  if (!is_power_of_two(u.size())) throw std::invalid_argument("grid size must be a power of two");
  if (ut.size() != u.size()) throw std::invalid_argument("u and ut differ in size");
  if (!(length > 0)) throw std::invalid_argument("domain length must be positive");
}

void check_packet(const WavePacketField& f) {
  if (!is_power_of_two(f.a.size())) throw std::invalid_argument("grid size must be a power of two");
  if (!(f.length > 0)) throw std::invalid_argument("domain length must be positive");
  const double m = f.k * f.length / (2.0 * kPi);
  if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, std::abs(m)))
    throw std::invalid_argument("carrier wavenumber is not a grid wavenumber");
}

Index steps_for(double t_end, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (t_end < 0) throw std::invalid_argument("t_end must be nonnegative");
  return static_cast<Index>(std::ceil(t_end / dt - 1e-9));
}

VectorXcd advect(Spectral& sp, const VectorXcd& a, const VectorXd& q, double velocity, double beta,
                 double tau) {
  VectorXcd ah = sp.forward(a);
  for (Index j = 0; j < q.size(); ++j) ah(j) *= std::exp(-I * (velocity * q(j) + 0.5 * beta * q(j) * q(j)) * tau);
  return sp.inverse(ah);
}

}  // namespace

Kind parse_kind(std::string_view name) {
  if (name == "klein_gordon") return Kind::klein_gordon;
  if (name == "fourth_order") return Kind::fourth_order;
  throw std::invalid_argument("unknown dispersion kind '" + std::string(name) + "'");
}

std::string kind_name(Kind kind) { return kind == Kind::klein_gordon ? "klein_gordon" : "fourth_order"; }

double Dispersion::symbol(double k) const {
  const double k2 = k * k;
  return kind == Kind::klein_gordon ? 1.0 + k2 : k2 * k2 - k2 + 1.0;
}

double Dispersion::omega(double k) const { return std::sqrt(symbol(k)); }

double Dispersion::group_velocity(double k) const {
  const double w = omega(k);
  return kind == Kind::klein_gordon ? k / w : (2.0 * k * k * k - k) / w;
}

double Dispersion::curvature(double k) const {
  const double w = omega(k);
  if (kind == Kind::klein_gordon) return 1.0 / (w * w * w);
  const double p = 2.0 * k * k * k - k;
  return (6.0 * k * k - 1.0) / w - p * p / (w * w * w);
}

double phase_match_residual(const Dispersion& d, int n, double k) {
  if (n != 2 && n != 3) throw std::invalid_argument("phase matching is defined for n = 2 or 3");
  return d.omega(n * k) - n * d.omega(k);
}

std::vector<double> find_phase_matched(const Dispersion& d, int n, double k_lo, double k_hi, Index cells) {
  std::vector<double> roots;
  if (!(k_hi > k_lo)) return roots;
  if (cells < 1) throw std::invalid_argument("cells must be positive");
  auto f = [&](double k) { return phase_match_residual(d, n, k); };
  const double h = (k_hi - k_lo) / static_cast<double>(cells);
  double a = k_lo, fa = f(a);
  for (Index i = 1; i <= cells; ++i) {
    const double b = i == cells ? k_hi : k_lo + h * static_cast<double>(i);
    const double fb = f(b);
    if (fa == 0.0) {
      if (roots.empty() || roots.back() != a) roots.push_back(a);
    } else if (fa * fb < 0.0) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  if (fa == 0.0 && (roots.empty() || roots.back() != a)) roots.push_back(a);
  return roots;
}

Grid::Grid(double len, Index n) : length(len), size(n) {
  if (!(len > 0)) throw std::invalid_argument("domain length must be positive");
  if (!is_power_of_two(n)) throw std::invalid_argument("grid size must be a power of two");
}

VectorXd Grid::x() const { return VectorXd::LinSpaced(size, 0.0, length - dx()); }

VectorXd Grid::wavenumbers() const {
  VectorXd q(size);
  const double base = 2.0 * kPi / length;
  for (Index j = 0; j < size; ++j) {
    if (j < size / 2) q(j) = base * static_cast<double>(j);
    else if (j == size / 2) q(j) = 0.0;
    else q(j) = base * static_cast<double>(j - size);
  }
  return q;
}

Index dealias_cutoff(Kind kind, Index n) { return kind == Kind::klein_gordon ? n / 3 : n / 4; }

RealField dealias(Kind kind, const RealField& f) {
  check_field(f.u, f.ut, f.length);
  Spectral sp;
  const auto keep = band_mask(kind, f.u.size());
  RealField out{f.length, sp.inverse(apply_mask(sp.forward(f.u), keep)).real(),
                sp.inverse(apply_mask(sp.forward(f.ut), keep)).real()};
  return out;
}

double field_energy(Kind kind, double eps, const RealField& f) {
  check_field(f.u, f.ut, f.length);
  const Grid grid(f.length, f.u.size());
  const Dispersion d{kind};
  const VectorXd q = grid.wavenumbers();
  Spectral sp;
  VectorXcd uh = sp.forward(f.u);
  for (Index j = 0; j < q.size(); ++j) uh(j) *= d.symbol(q(j));
  const VectorXd lu = sp.inverse(uh).real();
  const int p = d.degree();
  double e = 0.0;
  for (Index j = 0; j < f.u.size(); ++j) {
    const double u = f.u(j);
    e += 0.5 * f.ut(j) * f.ut(j) + 0.5 * u * lu(j) - eps / (p + 1) * std::pow(u, p + 1);
  }
  return e * grid.dx();
}

DirectResult solve_direct(Kind kind, double eps, const RealField& initial, const std::vector<double>& times,
                          double rtol) {
  check_field(initial.u, initial.ut, initial.length);
  if (!(rtol > 0)) throw std::invalid_argument("rtol must be positive");
  if (times.empty()) throw std::invalid_argument("no output times requested");
  if (times.front() < 0) throw std::invalid_argument("output times must be nonnegative");

  const Index n = initial.u.size();
  const Grid grid(initial.length, n);
  const Dispersion d{kind};
  const VectorXd q = grid.wavenumbers();
  VectorXd w2(n);
  for (Index j = 0; j < n; ++j) w2(j) = d.symbol(q(j));
  const auto keep = band_mask(kind, n);
  const int p = d.degree();
  const RealField start = dealias(kind, initial);

  // u and v share one complex transform: z = u + i v has spectrum U + i V
  // with U, V Hermitian, and the derivatives travel back the same way.
  auto sp = std::make_shared<Spectral>();
  OdeRhs rhs = [=](double, const VectorXd& y, VectorXd& dy) {
    const auto u = y.head(n);
    VectorXcd z(n);
    z.real() = u;
    z.imag() = y.tail(n);
    const VectorXcd zh = sp->forward(z);
    VectorXcd nh = VectorXcd::Zero(n);
    if (eps != 0.0) {
      VectorXd up = u.cwiseProduct(u);
      if (p == 3) up = up.cwiseProduct(u);
      nh = sp->forward(up);
    }
    VectorXcd out(n);
    for (Index j = 0; j < n; ++j) {
      if (!keep(j)) {
        out(j) = 0.0;
        continue;
      }
      const Complex zc = std::conj(zh((n - j) % n));
      const Complex uh = 0.5 * (zh(j) + zc);
      const Complex vh = -0.5 * I * (zh(j) - zc);
      out(j) = vh + I * (-w2(j) * uh + eps * nh(j));
    }
    const VectorXcd d = sp->inverse(out);
    dy.head(n) = d.real();
    dy.tail(n) = d.imag();
  };

  VectorXd y0(2 * n);
  y0 << start.u, start.ut;
  OdeOptions opt;
  opt.rtol = rtol;
  opt.atol = 1e-2 * rtol;
  const Trajectory traj = integrate_reference(rhs, y0, 0.0, times.back(), times, opt);

  DirectResult res;
  res.times = times;
  res.stats = traj.stats;
  const double e0 = field_energy(kind, eps, start);
  for (Index i = 0; i < traj.size(); ++i) {
    RealField f{initial.length, traj.states.col(i).head(n), traj.states.col(i).tail(n)};
    const double e = field_energy(kind, eps, f);
    res.energy.push_back(e);
    res.max_energy_drift = std::max(res.max_energy_drift, std::abs(e - e0) / std::abs(e0));
    res.snapshots.push_back(std::move(f));
  }
  return res;
}

DirectResult solve_kg_direct(double eps, const RealField& initial, const std::vector<double>& times, double rtol) {
  return solve_direct(Kind::klein_gordon, eps, initial, times, rtol);
}

DirectResult solve_fourth_direct(double eps, const RealField& initial, const std::vector<double>& times,
                                 double rtol) {
  return solve_direct(Kind::fourth_order, eps, initial, times, rtol);
}

NlsCoefficients nls_coefficients(Kind kind, double k, double eps) {
  const Dispersion d{kind};
  const double w = d.omega(k);
  if (kind == Kind::klein_gordon) return {d.group_velocity(k), d.curvature(k), 5.0 * eps * eps / (3.0 * w)};
  return {d.group_velocity(k), 0.0, 3.0 * eps / (2.0 * w)};
}

WavePacketField solve_nls(const WavePacketField& field, double t_end, double dt, bool nonlinear) {
  check_packet(field);
  const Index steps = steps_for(t_end, dt);
  WavePacketField out = field;
  if (steps == 0) return out;
  const double tau = t_end / static_cast<double>(steps);
  const auto c = nls_coefficients(field.kind, field.k, field.eps);
  const double gamma = nonlinear ? c.gamma : 0.0;
  const VectorXd q = Grid(field.length, field.a.size()).wavenumbers();
  Spectral sp;
  VectorXcd ah = sp.forward(out.a);
  VectorXcd phase(q.size());
  for (Index j = 0; j < q.size(); ++j) phase(j) = std::exp(-I * (c.velocity * q(j) + 0.5 * c.beta * q(j) * q(j)) * tau);
  auto kick = [&](VectorXcd& a, double h) {
    for (Index j = 0; j < a.size(); ++j) a(j) *= std::exp(I * (gamma * std::norm(a(j)) * h));
  };
  if (gamma == 0.0) {
    for (Index s = 0; s < steps; ++s) ah = ah.cwiseProduct(phase);
    out.a = sp.inverse(ah);
    return out;
  }
  for (Index s = 0; s < steps; ++s) {
    kick(out.a, 0.5 * tau);
    out.a = sp.inverse(sp.forward(out.a).cwiseProduct(phase));
    kick(out.a, 0.5 * tau);
  }
  return out;
}

VectorXcd amplitude_rate(const WavePacketField& field) {
  check_packet(field);
  const auto c = nls_coefficients(field.kind, field.k, field.eps);
  const VectorXd q = Grid(field.length, field.a.size()).wavenumbers();
  Spectral sp;
  VectorXcd ah = sp.forward(field.a);
  for (Index j = 0; j < q.size(); ++j) ah(j) *= -I * c.velocity * q(j) - I * 0.5 * c.beta * q(j) * q(j);
  VectorXcd rate = sp.inverse(ah);
  for (Index j = 0; j < rate.size(); ++j) rate(j) += I * c.gamma * std::norm(field.a(j)) * field.a(j);
  return rate;
}

double mass(const WavePacketField& field) {
  return field.a.squaredNorm() * field.length / static_cast<double>(field.a.size());
}

double centroid(const WavePacketField& field) {
  const VectorXd x = Grid(field.length, field.a.size()).x();
  const VectorXd w = field.a.cwiseAbs2();
  return x.dot(w) / w.sum();
}

VectorXcd linear_gaussian(const Grid& grid, Complex a, double xc, double sigma, double velocity, double beta,
                          double t) {
  const VectorXd x = grid.x();
  const Complex s2 = Complex(sigma * sigma, beta * t);
  VectorXcd out(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const double y = x(j) - xc - velocity * t;
    out(j) = a * sigma / std::sqrt(s2) * std::exp(-y * y / (2.0 * s2));
  }
  return out;
}

RealField reconstruct_field(const WavePacketField& field, double t, int order) {
  check_packet(field);
  if (order != 0 && order != 1) throw std::invalid_argument("reconstruction order must be 0 or 1");
  const Dispersion d{field.kind};
  const double w = d.omega(field.k);
  const VectorXd x = Grid(field.length, field.a.size()).x();
  const VectorXcd& A = field.a;
  const VectorXcd At = amplitude_rate(field);
  const Index n = A.size();

  RealField out{field.length, VectorXd(n), VectorXd(n)};
  for (Index j = 0; j < n; ++j) {
    const Complex e = std::exp(I * (field.k * x(j) - w * t));
    out.u(j) = 2.0 * (A(j) * e).real();
    out.ut(j) = 2.0 * ((At(j) - I * w * A(j)) * e).real();
  }
  if (order == 0 || field.eps == 0.0) return out;

  if (field.kind == Kind::klein_gordon) {
    const double d0 = d.symbol(0.0);
    const double d2 = d.symbol(2.0 * field.k) - 4.0 * w * w;
    for (Index j = 0; j < n; ++j) {
      const Complex e2 = std::exp(2.0 * I * (field.k * x(j) - w * t));
      out.u(j) += field.eps * (2.0 * std::norm(A(j)) / d0 + 2.0 * (A(j) * A(j) * e2).real() / d2);
      out.ut(j) += field.eps * (4.0 * (std::conj(A(j)) * At(j)).real() / d0 +
                                2.0 * ((2.0 * A(j) * At(j) - 2.0 * I * w * A(j) * A(j)) * e2).real() / d2);
    }
  } else {
    const double d3 = d.symbol(3.0 * field.k) - 9.0 * w * w;
    if (std::abs(d3) < 1e-8) throw std::domain_error("carrier is phase matched; use the two-wave system");
    for (Index j = 0; j < n; ++j) {
      const Complex e3 = std::exp(3.0 * I * (field.k * x(j) - w * t));
      const Complex a3 = A(j) * A(j) * A(j);
      out.u(j) += field.eps * 2.0 * (a3 * e3).real() / d3;
      out.ut(j) += field.eps * 2.0 * ((3.0 * A(j) * A(j) * At(j) - 3.0 * I * w * a3) * e3).real() / d3;
    }
  }
  return out;
}

TwoWave two_wave_rate(double k, double eps, const TwoWave& s) {
  const Dispersion d{Kind::fourth_order};
  const Complex ca = 1.0 / (2.0 * I * d.omega(k));
  const Complex cb = 1.0 / (2.0 * I * d.omega(3.0 * k));
  const auto& A = s.a;
  const auto& B = s.b;
  TwoWave r{VectorXcd(A.size()), VectorXcd(B.size())};
  for (Index j = 0; j < A.size(); ++j) {
    const double a2 = std::norm(A(j)), b2 = std::norm(B(j));
    const Complex ac = std::conj(A(j));
    r.a(j) = eps * ca * (-3.0 * a2 * A(j) - 6.0 * b2 * A(j) - 3.0 * ac * ac * B(j));
    r.b(j) = eps * cb * (-3.0 * b2 * B(j) - 6.0 * a2 * B(j) - A(j) * A(j) * A(j));
  }
  return r;
}

TwoWave solve_two_wave(double length, double k, double eps, TwoWave state, double t_end, double dt) {
  const Dispersion d{Kind::fourth_order};
  if (std::abs(phase_match_residual(d, 3, k)) >= 1e-6)
    throw std::invalid_argument("two-wave system needs a phase-matched carrier");
  if (state.a.size() != state.b.size()) throw std::invalid_argument("A and B differ in size");
  const Index steps = steps_for(t_end, dt);
  if (steps == 0) return state;
  const double tau = t_end / static_cast<double>(steps);
  const VectorXd q = Grid(length, state.a.size()).wavenumbers();
  const double va = d.group_velocity(k), vb = d.group_velocity(3.0 * k);
  Spectral sp;

  auto axpy = [](const TwoWave& s, double h, const TwoWave& r) {
    return TwoWave{s.a + h * r.a, s.b + h * r.b};
  };
  auto rk4 = [&](const TwoWave& s, double h) {
    const TwoWave k1 = two_wave_rate(k, eps, s);
    const TwoWave k2 = two_wave_rate(k, eps, axpy(s, 0.5 * h, k1));
    const TwoWave k3 = two_wave_rate(k, eps, axpy(s, 0.5 * h, k2));
    const TwoWave k4 = two_wave_rate(k, eps, axpy(s, h, k3));
    return TwoWave{s.a + h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a),
                   s.b + h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b)};
  };
  for (Index s = 0; s < steps; ++s) {
    state.a = advect(sp, state.a, q, va, 0.0, 0.5 * tau);
    state.b = advect(sp, state.b, q, vb, 0.0, 0.5 * tau);
    state = rk4(state, tau);
    state.a = advect(sp, state.a, q, va, 0.0, 0.5 * tau);
    state.b = advect(sp, state.b, q, vb, 0.0, 0.5 * tau);
  }
  return state;
}

PacketReport packet_compare(const PacketOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  if (!(o.eps >= 0)) throw std::invalid_argument("eps must be nonnegative");
  if (!(o.k > 0)) throw std::invalid_argument("carrier wavenumber must be positive");
  if (!(o.sigma_wavelengths >= 10)) throw std::invalid_argument("envelope must span at least 10 wavelengths");
  if (o.periods < 1) throw std::invalid_argument("periods must be positive");
  if (o.order != 0 && o.order != 1) throw std::invalid_argument("reconstruction order must be 0 or 1");
  if (o.checkpoints.empty()) throw std::invalid_argument("no checkpoints");
  for (std::size_t i = 0; i < o.checkpoints.size(); ++i) {
    if (!(o.checkpoints[i] > 0) || (i > 0 && !(o.checkpoints[i] > o.checkpoints[i - 1])))
      throw std::invalid_argument("checkpoints must be positive and increasing");
  }

  const Dispersion d{o.kind};
  const double lambda = 2.0 * kPi / o.k;
  const double length = lambda * static_cast<double>(o.periods);
  const double sigma = o.sigma_wavelengths * lambda;
  const double travel = d.group_velocity(o.k) * o.checkpoints.back();
  const double center = o.center >= 0 ? o.center : 0.5 * (length - travel);
  if (center - 6.0 * sigma + std::min(0.0, travel) < 0.0 || center + 6.0 * sigma + std::max(0.0, travel) > length)
    throw std::invalid_argument("domain too short: the packet would wrap within the run");
  const Grid grid(length, o.points);

  PacketReport rep;
  rep.options = o;
  rep.x = grid.x();
  rep.length = length;
  rep.center = center;

  WavePacketField field{length, linear_gaussian(grid, o.amplitude, center, sigma, 0.0, 0.0, 0.0), o.k, o.eps,
                        o.kind};
  const RealField initial = reconstruct_field(field, 0.0, o.order);
  const DirectResult direct = solve_direct(o.kind, o.eps, initial, o.checkpoints, o.rtol);
  rep.energy_drift = direct.max_energy_drift;
  rep.stats = direct.stats;

  const double m0 = mass(field);
  double t = 0.0;
  for (std::size_t i = 0; i < o.checkpoints.size(); ++i) {
    const double tc = o.checkpoints[i];
    field = solve_nls(field, tc - t, o.nls_dt);
    t = tc;
    rep.mass_drift = std::max(rep.mass_drift, std::abs(mass(field) - m0) / m0);
    PacketCheckpoint cp;
    cp.t = tc;
    cp.direct = direct.snapshots[i];
    cp.reconstructed = reconstruct_field(field, tc, o.order);
    cp.rel_l2 = (cp.direct.u - cp.reconstructed.u).norm() / cp.direct.u.norm();
    rep.checkpoints.push_back(std::move(cp));
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace asymptotica::mspde
