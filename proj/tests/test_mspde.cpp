#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "asymptotica/mspde.hpp"
#include "asymptotica/ode.hpp"

using namespace asymptotica;
using namespace asymptotica::mspde;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex I{0.0, 1.0};

RealField gaussian_packet(const Grid& g, double a, double xc, double sigma, double k) {
  const VectorXd x = g.x();
  RealField f{g.length, VectorXd(g.size), VectorXd::Zero(g.size)};
  for (Index j = 0; j < g.size; ++j) f.u(j) = 2 * a * std::exp(-std::pow(x(j) - xc, 2) / (2 * sigma * sigma)) * std::cos(k * x(j));
  return f;
}

double max_abs(const VectorXcd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("dispersion relations", "[mspde][dispersion]") {
  const Dispersion kg{Kind::klein_gordon}, fo{Kind::fourth_order};
  CHECK(kg.omega(0) == 1.0);
  CHECK(kg.group_velocity(0) == 0.0);
  CHECK_THAT(kg.omega(1), WithinAbs(std::sqrt(2.0), 1e-15));
  CHECK_THAT(kg.group_velocity(1), WithinAbs(1 / std::sqrt(2.0), 1e-15));
  // omega = 1 at k = 1 and omega' = (2k^3 - k) / omega = 1
  CHECK_THAT(fo.omega(1), WithinAbs(1.0, 1e-15));
  CHECK_THAT(fo.group_velocity(1), WithinAbs(1.0, 1e-15));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pick(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const double k = pick(rng);
    for (const auto& d : {kg, fo}) {
      CHECK(d.omega(k) > 0);
      CHECK(d.omega(-k) == d.omega(k));
      CHECK(d.group_velocity(-k) == -d.group_velocity(k));
      // derivatives against central differences of the level below
      const double h = 1e-5;
      CHECK_THAT(d.group_velocity(k), WithinAbs((d.omega(k + h) - d.omega(k - h)) / (2 * h), 1e-6 * (1 + k * k)));
      CHECK_THAT(d.curvature(k),
                 WithinAbs((d.group_velocity(k + h) - d.group_velocity(k - h)) / (2 * h), 1e-6 * (1 + k * k)));
    }
  }
  CHECK(parse_kind("fourth_order") == Kind::fourth_order);
  CHECK(kind_name(Kind::klein_gordon) == "klein_gordon");
  CHECK_THROWS_AS(parse_kind("sine_gordon"), std::invalid_argument);
}

TEST_CASE("phase matching", "[mspde][phase]") {
  const Dispersion kg{Kind::klein_gordon}, fo{Kind::fourth_order};
  for (int i = -10000; i <= 10000; ++i) CHECK(phase_match_residual(kg, 2, i * 1e-3) < 0);
  CHECK(std::abs(phase_match_residual(fo, 3, 1 / std::sqrt(3.0))) <= 1e-12);
  CHECK(phase_match_residual(kg, 2, 0) == -1.0);
  CHECK(phase_match_residual(fo, 3, 0) == -2.0);

  const auto roots = find_phase_matched(fo, 3, 0.1, 2.0);
  REQUIRE(roots.size() == 1);
  CHECK_THAT(roots[0], WithinAbs(1 / std::sqrt(3.0), 1e-10));
  const auto neg = find_phase_matched(fo, 3, -2.0, -0.1);
  REQUIRE(neg.size() == 1);
  CHECK_THAT(neg[0], WithinAbs(-1 / std::sqrt(3.0), 1e-10));

  CHECK(find_phase_matched(kg, 3, 0.1, 10).empty());
  CHECK(find_phase_matched(kg, 2, -10, 10).empty());
  CHECK(find_phase_matched(fo, 3, 1.0, 1.0).empty());
  // 1 + n^2 k^2 < n^2 (1 + k^2): the KG residual rises monotonically towards
  // 0 from below, so no root hides between grid points
  for (int n : {2, 3}) {
    double prev = phase_match_residual(kg, n, 0);
    for (int i = 1; i <= 1000; ++i) {
      const double r = phase_match_residual(kg, n, i * 1e-2);
      CHECK(r > prev);
      CHECK(r < 0);
      prev = r;
    }
  }
  CHECK_THROWS_AS(phase_match_residual(kg, 4, 1.0), std::invalid_argument);
}

TEST_CASE("grid and dealiasing", "[mspde]") {
  const Grid g(2 * kPi, 16);
  CHECK(g.wavenumbers()(1) == 1.0);
  CHECK(g.wavenumbers()(15) == -1.0);
  CHECK(g.wavenumbers()(8) == 0.0);
  CHECK_THROWS_AS(Grid(1.0, 12), std::invalid_argument);
  CHECK(dealias_cutoff(Kind::klein_gordon, 96) == 32);
  CHECK(dealias_cutoff(Kind::fourth_order, 96) == 24);

  // mode 5 survives the quadratic cutoff (16/3 = 5), not the cubic one (4)
  RealField f{2 * kPi, VectorXd(16), VectorXd::Zero(16)};
  const VectorXd x = g.x();
  for (Index j = 0; j < 16; ++j) f.u(j) = std::cos(5 * x(j)) + std::cos(x(j));
  CHECK((dealias(Kind::klein_gordon, f).u - f.u).cwiseAbs().maxCoeff() < 1e-14);
  const RealField c = dealias(Kind::fourth_order, f);
  for (Index j = 0; j < 16; ++j) CHECK_THAT(c.u(j), WithinAbs(std::cos(x(j)), 1e-14));
}

TEST_CASE("direct solvers reproduce linear normal modes", "[mspde][direct]") {
  const Grid g(2 * kPi * 4, 64);
  const VectorXd x = g.x();
  for (Kind kind : {Kind::klein_gordon, Kind::fourth_order}) {
    INFO(kind_name(kind));
    const double k = 1.0;
    const double w = Dispersion{kind}.omega(k);
    RealField f{g.length, VectorXd(64), VectorXd::Zero(64)};
    for (Index j = 0; j < 64; ++j) f.u(j) = std::cos(k * x(j));
    const auto r = solve_direct(kind, 0.0, f, {10.0});
    double err = 0;
    for (Index j = 0; j < 64; ++j) err = std::max(err, std::abs(r.snapshots[0].u(j) - std::cos(k * x(j)) * std::cos(w * 10)));
    CHECK(err <= 1e-8);
  }
}

TEST_CASE("direct solvers conserve energy", "[mspde][direct]") {
  const Grid g(2 * kPi * 16, 256);
  const RealField f = gaussian_packet(g, 0.5, g.length / 2, 6.0, 1.0);
  for (Kind kind : {Kind::klein_gordon, Kind::fourth_order}) {
    INFO(kind_name(kind));
    const auto r = solve_direct(kind, 0.1, f, uniform_grid(0, 100, 51), 1e-10);
    CHECK(r.max_energy_drift <= 1e-8);
    CHECK(r.max_energy_drift <= 100 * 1e-10);
  }
  // energy of a dealiased KG field against a hand sum: u = a cos x on [0, 2 pi)
  const Grid h(2 * kPi, 32);
  RealField c{h.length, VectorXd(32), VectorXd::Zero(32)};
  for (Index j = 0; j < 32; ++j) c.u(j) = 0.3 * std::cos(h.x()(j));
  // (1/2)(k^2 + 1) a^2 pi, and the cubic term integrates to zero
  CHECK_THAT(field_energy(Kind::klein_gordon, 0.1, c), WithinAbs(0.5 * 2 * 0.09 * kPi, 1e-14));
}

TEST_CASE("direct solvers self-converge under grid refinement", "[mspde][direct]") {
  for (Kind kind : {Kind::klein_gordon, Kind::fourth_order}) {
    INFO(kind_name(kind));
    const Grid coarse(2 * kPi * 16, 512), fine(2 * kPi * 16, 1024);
    const auto a = solve_direct(kind, 0.1, gaussian_packet(coarse, 0.5, coarse.length / 2, 6.0, 1.0), {10.0}, 1e-12);
    const auto b = solve_direct(kind, 0.1, gaussian_packet(fine, 0.5, fine.length / 2, 6.0, 1.0), {10.0}, 1e-12);
    double gap = 0;
    for (Index j = 0; j < 512; ++j) gap = std::max(gap, std::abs(a.snapshots[0].u(j) - b.snapshots[0].u(2 * j)));
    CHECK(gap <= 1e-8);
  }
}

TEST_CASE("split-step amplitude solver", "[mspde][nls]") {
  const double eps = 0.1;
  const Grid g(2 * kPi * 64, 1024);
  const double sigma = 20.0, xc = g.length / 3;
  const auto c = nls_coefficients(Kind::klein_gordon, 1.0, eps);
  CHECK_THAT(c.beta, WithinAbs(std::pow(2.0, -1.5), 1e-15));
  CHECK_THAT(c.gamma, WithinAbs(eps * eps * 5 / (3 * std::sqrt(2.0)), 1e-15));
  const auto cf = nls_coefficients(Kind::fourth_order, 1.0, eps);
  CHECK(cf.beta == 0.0);
  CHECK_THAT(cf.gamma, WithinAbs(0.15, 1e-15));

  WavePacketField f{g.length, linear_gaussian(g, 0.7, xc, sigma, 0, 0, 0), 1.0, eps, Kind::klein_gordon};

  SECTION("linear limit matches the Fourier-propagated Gaussian") {
    for (double t : {1.0, 10.0, 40.0}) {
      const auto out = solve_nls(f, t, 0.05, false);
      CHECK(max_abs(out.a - linear_gaussian(g, 0.7, xc, sigma, c.velocity, c.beta, t)) <= 1e-10);
    }
  }
  SECTION("L2 norm is conserved") {
    const auto out = solve_nls(f, 1 / eps, 0.01);
    CHECK(std::abs(mass(out) - mass(f)) / mass(f) <= 1e-10);
    f.kind = Kind::fourth_order;
    const auto out4 = solve_nls(f, 1 / eps, 0.01);
    CHECK(std::abs(mass(out4) - mass(f)) / mass(f) <= 1e-10);
  }
  SECTION("zero stays zero") {
    f.a.setZero();
    CHECK(solve_nls(f, 5.0, 0.1).a.isZero(0.0));
  }
  SECTION("second order in dt") {
    f.eps = 0.5;  // make the splitting error visible
    const auto ref = solve_nls(f, 10.0, 0.0125);
    const double e1 = max_abs(solve_nls(f, 10.0, 0.2).a - ref.a);
    const double e2 = max_abs(solve_nls(f, 10.0, 0.1).a - ref.a);
    const double e3 = max_abs(solve_nls(f, 10.0, 0.05).a - ref.a);
    CHECK_THAT(std::log2(e1 / e2), WithinAbs(2.0, 0.2));
    CHECK_THAT(std::log2(e2 / e3), WithinAbs(2.0, 0.2));
  }
  SECTION("centroid moves at the group velocity") {
    const double x0 = centroid(f);
    const auto out = solve_nls(f, 1 / eps, 0.01);
    CHECK_THAT((centroid(out) - x0) * eps, WithinRel(c.velocity, 0.02));
  }
  SECTION("rate of a plane wave is the nonlinear phase rotation") {
    f.a.setConstant(0.4);
    const VectorXcd r = amplitude_rate(f);
    CHECK(max_abs(r - VectorXcd::Constant(r.size(), I * c.gamma * 0.064)) <= 1e-15);
  }
  CHECK_THROWS_AS(solve_nls(f, 1.0, 0.0), std::invalid_argument);
  WavePacketField off = f;
  off.k = 1.01;
  CHECK_THROWS_AS(solve_nls(off, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("reconstruction from the envelope", "[mspde][reconstruct]") {
  const double eps = 0.1, a = 0.3;
  const Grid g(2 * kPi * 8, 128);
  const VectorXd x = g.x();
  WavePacketField f{g.length, VectorXcd::Constant(128, a), 1.0, eps, Kind::klein_gordon};
  const double w = std::sqrt(2.0), t = 1.7;
  const RealField r0 = reconstruct_field(f, t, 0);
  const RealField r1 = reconstruct_field(f, t, 1);
  for (Index j = 0; j < 128; ++j) {
    const double th = x(j) - w * t;
    CHECK_THAT(r0.u(j), WithinAbs(2 * a * std::cos(th), 1e-14));
    CHECK_THAT(r1.u(j) - r0.u(j), WithinAbs(2 * eps * a * a - 2 * eps / 3 * a * a * std::cos(2 * th), 1e-14));
  }

  // time derivative against a centred difference along the amplitude flow
  const double sigma = 15.0;
  WavePacketField p{g.length, linear_gaussian(g, Complex(0.4, 0.2), g.length / 2, sigma, 0, 0, 0), 1.0, 0.3,
                    Kind::klein_gordon};
  for (Kind kind : {Kind::klein_gordon, Kind::fourth_order}) {
    p.kind = kind;
    std::vector<double> errs;
    for (double h : {4e-2, 2e-2, 1e-2}) {
      const double t0 = 2.0;
      const WavePacketField lo = solve_nls(p, t0 - h, h / 4);
      const WavePacketField mid = solve_nls(lo, h, h / 4);
      const WavePacketField hi = solve_nls(mid, h, h / 4);
      const RealField rm = reconstruct_field(mid, t0, 1);
      const VectorXd fd = (reconstruct_field(hi, t0 + h, 1).u - reconstruct_field(lo, t0 - h, 1).u) / (2 * h);
      errs.push_back((fd - rm.ut).cwiseAbs().maxCoeff());
    }
    INFO(kind_name(kind) << ": " << errs[0] << " " << errs[1] << " " << errs[2]);
    CHECK(errs[2] < 1e-4);
    CHECK(errs[0] / errs[1] > 3.0);
    CHECK(errs[1] / errs[2] > 3.0);
  }
  CHECK_THROWS_AS(reconstruct_field(f, 0, 2), std::invalid_argument);
  WavePacketField pm{2 * kPi * std::sqrt(3.0) * 8, VectorXcd::Constant(64, 0.1), 1 / std::sqrt(3.0), 0.1,
                     Kind::fourth_order};
  CHECK_THROWS_AS(reconstruct_field(pm, 0, 1), std::domain_error);
  CHECK_NOTHROW(reconstruct_field(pm, 0, 0));
}

TEST_CASE("phase-matched two-wave system", "[mspde][twowave]") {
  const double k = 1 / std::sqrt(3.0), eps = 0.1;
  const double length = 2 * kPi / k * 16;
  const Index n = 256;
  const Dispersion d{Kind::fourth_order};

  SECTION("B is driven from zero by the A^3 forcing") {
    TwoWave s{VectorXcd::Constant(n, Complex(0.5, 0.1)), VectorXcd::Zero(n)};
    const double t = 1e-3;
    const TwoWave out = solve_two_wave(length, k, eps, s, t, t / 4);
    const Complex a0(0.5, 0.1);
    const Complex expected = -eps * a0 * a0 * a0 / (2.0 * I * d.omega(3 * k));
    CHECK(std::abs(out.b(0) / t - expected) <= 1e-3 * std::abs(expected));
    CHECK(std::abs(out.b(0)) > 0);
  }
  SECTION("zero stays zero") {
    TwoWave s{VectorXcd::Zero(n), VectorXcd::Zero(n)};
    const TwoWave out = solve_two_wave(length, k, eps, s, 5.0, 0.1);
    CHECK(out.a.isZero(0.0));
    CHECK(out.b.isZero(0.0));
  }
  SECTION("uniform amplitudes follow the ODE system") {
    const Complex a0(0.6, -0.2), b0(0.1, 0.3);
    const Complex ca = eps / (2.0 * I * d.omega(k)), cb = eps / (2.0 * I * d.omega(3 * k));
    OdeRhs rhs = [&](double, const VectorXd& y, VectorXd& dy) {
      const Complex A(y(0), y(1)), B(y(2), y(3));
      const Complex dA = ca * (-3.0 * std::norm(A) * A - 6.0 * std::norm(B) * A - 3.0 * std::conj(A) * std::conj(A) * B);
      const Complex dB = cb * (-3.0 * std::norm(B) * B - 6.0 * std::norm(A) * B - A * A * A);
      dy << dA.real(), dA.imag(), dB.real(), dB.imag();
    };
    OdeOptions opt;
    opt.rtol = 1e-13;
    opt.atol = 1e-15;
    const auto ref = integrate_reference(rhs, (VectorXd(4) << a0.real(), a0.imag(), b0.real(), b0.imag()).finished(),
                                         0.0, 20.0, {20.0}, opt);
    const TwoWave out =
        solve_two_wave(length, k, eps, {VectorXcd::Constant(n, a0), VectorXcd::Constant(n, b0)}, 20.0, 0.01);
    CHECK(std::abs(out.a(7) - Complex(ref.states(0, 0), ref.states(1, 0))) <= 1e-8);
    CHECK(std::abs(out.b(7) - Complex(ref.states(2, 0), ref.states(3, 0))) <= 1e-8);
  }
  SECTION("each wave travels at its own group velocity when the coupling is off") {
    const Grid g(2 * length, 2 * n);
    const double xc = g.length / 3;
    const VectorXcd g0 = linear_gaussian(g, 0.5, xc, 10.0, 0, 0, 0);
    const TwoWave out = solve_two_wave(g.length, k, 0.0, {g0, g0}, 10.0, 0.5);
    CHECK(max_abs(out.a - linear_gaussian(g, 0.5, xc, 10.0, d.group_velocity(k), 0, 10.0)) <= 1e-10);
    CHECK(max_abs(out.b - linear_gaussian(g, 0.5, xc, 10.0, d.group_velocity(3 * k), 0, 10.0)) <= 1e-10);
  }
  TwoWave s{VectorXcd::Zero(n), VectorXcd::Zero(n)};
  CHECK_THROWS_AS(solve_two_wave(length, 1.0, eps, s, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("packet comparison", "[mspde][packet]") {
  SECTION("eps = 0 reduces to linear dispersion truncated at second order") {
    PacketOptions o;
    o.eps = 0.0;
    o.checkpoints = {10.0};
    const auto r = packet_compare(o);
    CHECK(r.checkpoints[0].rel_l2 <= 1e-4);
  }
  SECTION("pinned run at eps = 0.1, k = 1") {
    const auto r = packet_compare(PacketOptions{});
    REQUIRE(r.checkpoints.size() == 3);
    CHECK(r.checkpoints[1].t == 10.0);
    CHECK(r.checkpoints[1].rel_l2 <= 0.05);
    CHECK(r.checkpoints[0].rel_l2 < r.checkpoints[1].rel_l2);
    CHECK(r.checkpoints[1].rel_l2 < r.checkpoints[2].rel_l2);
    CHECK(r.energy_drift <= 1e-8);
    CHECK(r.mass_drift <= 1e-10);
  }
  SECTION("argument checks") {
    PacketOptions o;
    o.sigma_wavelengths = 5;
    CHECK_THROWS_AS(packet_compare(o), std::invalid_argument);
    o = PacketOptions{};
    o.periods = 64;
    CHECK_THROWS_AS(packet_compare(o), std::invalid_argument);
    o = PacketOptions{};
    o.checkpoints = {10.0, 5.0};
    CHECK_THROWS_AS(packet_compare(o), std::invalid_argument);
  }
}
