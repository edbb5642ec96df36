#include <catch_amalgamated.hpp>

#include <cmath>

#include "asymptotica/ode.hpp"

using namespace asymptotica;
using Catch::Matchers::WithinAbs;
using Eigen::VectorXd;

TEST_CASE("linear test equation", "[ode]") {
  auto f = [](double, const VectorXd& y, VectorXd& dy) { dy = -y; };
  for (double rtol : {1e-6, 1e-8, 1e-10}) {
    OdeOptions o;
    o.rtol = rtol;
    o.atol = rtol * 1e-2;
    const auto tr = integrate_reference(f, VectorXd::Ones(1), 0.0, 1.0, {}, o);
    CHECK(tr.times.back() == 1.0);
    CHECK(std::abs(tr.states(0, tr.size() - 1) - std::exp(-1.0)) <= 10 * rtol);
  }
}

TEST_CASE("dense output on the harmonic oscillator", "[ode]") {
  auto f = [](double, const VectorXd& y, VectorXd& dy) {
    dy(0) = y(1);
    dy(1) = -y(0);
  };
  const auto grid = uniform_grid(0.0, 50.0, 5001);
  OdeOptions o;
  o.rtol = 1e-11;
  o.atol = 1e-13;
  const auto tr = integrate_reference(f, (VectorXd(2) << 1.0, 0.0).finished(), 0.0, 50.0, grid, o);
  REQUIRE(tr.size() == 5001);
  double worst = 0.0;
  for (Index i = 0; i < tr.size(); ++i) {
    const double t = tr.times[static_cast<std::size_t>(i)];
    worst = std::max(worst, std::abs(tr.states(0, i) - std::cos(t)));
    worst = std::max(worst, std::abs(tr.states(1, i) + std::sin(t)));
  }
  CHECK(worst < 1e-8);
  // far fewer steps than output samples: the samples come from interpolation
  CHECK(tr.stats.accepted < 5001);
}

TEST_CASE("deterministic for fixed inputs", "[ode]") {
  auto f = [](double t, const VectorXd& y, VectorXd& dy) { dy(0) = std::sin(t * y(0)) - y(0); };
  const auto grid = uniform_grid(0.0, 20.0, 257);
  const auto a = integrate_reference(f, VectorXd::Constant(1, 0.7), 0.0, 20.0, grid);
  const auto b = integrate_reference(f, VectorXd::Constant(1, 0.7), 0.0, 20.0, grid);
  CHECK(a.states == b.states);
  CHECK(a.stats.accepted == b.stats.accepted);
}

TEST_CASE("step-size underflow is reported", "[ode]") {
  // y' = y^2, y(0) = 1 blows up at t = 1
  auto f = [](double, const VectorXd& y, VectorXd& dy) { dy = y.array().square(); };
  CHECK_THROWS_AS(integrate_reference(f, VectorXd::Ones(1), 0.0, 2.0), SolverError);
}

TEST_CASE("argument validation", "[ode]") {
  auto f = [](double, const VectorXd& y, VectorXd& dy) { dy = -y; };
  OdeOptions bad;
  bad.rtol = 0.0;
  CHECK_THROWS_AS(integrate_reference(f, VectorXd::Ones(1), 0.0, 1.0, {}, bad), std::invalid_argument);
  CHECK_THROWS_AS(integrate_reference(f, VectorXd::Ones(1), 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate_reference(f, VectorXd::Ones(1), 0.0, 1.0, {0.5, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(integrate_reference(f, VectorXd::Ones(1), 0.0, 1.0, {1.5}), std::invalid_argument);
  const auto tr = integrate_reference(f, VectorXd::Ones(1), 0.0, 0.0, {0.0});
  CHECK(tr.size() == 1);
}
