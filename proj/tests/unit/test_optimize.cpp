#include <cmath>
#include <mutex>
#include <random>

#include "doctest.h"
#include "spinclock/optimize.hpp"

using namespace spinclock;

namespace {

FitProblem box(std::vector<Parameter> params, int starts = 8, std::uint64_t seed = 1) {
  FitProblem p;
  p.parameters = std::move(params);
  p.options.starts = starts;
  p.options.seed = seed;
  return p;
}

bool rosenbrock(std::span<const double> x, std::vector<double>& r) {
  r = {10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]};
  return true;
}

}  // namespace

TEST_CASE("least_squares: convex quadratic") {
  const FitResult f = least_squares(box({{"x", 0.0, -10.0, 10.0}}), [](std::span<const double> x, std::vector<double>& r) {
    r = {x[0] - 3.0};
    return true;
  });
  CHECK(f.value("x") == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(f.status == FitStatus::kConverged);
  CHECK_THROWS(f.value("y"));
}

TEST_CASE("least_squares: Rosenbrock from 8 starts") {
  const FitResult f = least_squares(box({{"x", -1.5, -2.0, 2.0}, {"y", 2.0, -1.0, 3.0}}), rosenbrock);
  CHECK(std::abs(f.value("x") - 1.0) < 1e-4);
  CHECK(std::abs(f.value("y") - 1.0) < 1e-4);
  REQUIRE(f.starts.size() == 8);
  for (const StartOutcome& s : f.starts) CHECK(f.ssr <= s.ssr);
}

TEST_CASE("least_squares: both basins of a bimodal landscape appear among starts") {
  const FitResult f = least_squares(box({{"x", 0.5, -3.0, 3.0}}, 8), [](std::span<const double> x, std::vector<double>& r) {
    r = {x[0] * x[0] - 1.0};
    return true;
  });
  bool plus = false;
  bool minus = false;
  for (const StartOutcome& s : f.starts) {
    plus = plus || std::abs(s.params[0] - 1.0) < 1e-4;
    minus = minus || std::abs(s.params[0] + 1.0) < 1e-4;
  }
  CHECK(plus);
  CHECK(minus);
}

TEST_CASE("property: the optimizer never evaluates or returns points outside the bounds") {
  std::mutex mu;
  bool outside = false;
  const std::vector<Parameter> params{{"a", 1.0, -2.0, 5.0}, {"b", 0.5, 1e-3, 10.0, false, true}};
  FitProblem p = box(params, 12);
  const FitResult f = least_squares(p, [&](std::span<const double> x, std::vector<double>& r) {
    {
      std::lock_guard<std::mutex> lock(mu);
      outside = outside || x[0] < -2.0 || x[0] > 5.0 || x[1] < 1e-3 || x[1] > 10.0;
    }
    r = {x[0] - 20.0, x[1] - 100.0};  // optimum outside the box
    return true;
  });
  CHECK_FALSE(outside);
  CHECK(f.value("a") == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(f.value("b") == doctest::Approx(10.0).epsilon(1e-6));
  for (const StartOutcome& s : f.starts) {
    CHECK(s.params[0] >= -2.0);
    CHECK(s.params[0] <= 5.0);
  }
}

TEST_CASE("property: multi-start determinism under a fixed seed and any thread count") {
  FitProblem p = box({{"x", -1.5, -2.0, 2.0}, {"y", 2.0, -1.0, 3.0}}, 10, 99);
  const FitResult a = least_squares(p, rosenbrock);
  p.options.threads = 4;
  const FitResult b = least_squares(p, rosenbrock);
  REQUIRE(a.starts.size() == b.starts.size());
  CHECK(a.best == b.best);
  for (std::size_t i = 0; i < a.starts.size(); ++i) {
    CHECK(a.starts[i].start == b.starts[i].start);
    CHECK(a.starts[i].params == b.starts[i].params);
  }
  p.options.seed = 100;
  const FitResult c = least_squares(p, rosenbrock);
  CHECK(c.starts[1].start != a.starts[1].start);
}

TEST_CASE("least_squares: rejected points, failure status and fixed parameters") {
  const FitResult f = least_squares(box({{"x", 2.0, -5.0, 5.0}}), [](std::span<const double> x, std::vector<double>& r) {
    if (x[0] < 0.0) return false;
    r = {std::log(x[0] + 1e-300) - 0.0};
    return true;
  });
  CHECK(f.value("x") == doctest::Approx(1.0).epsilon(1e-6));

  const FitResult none = least_squares(box({{"x", 2.0, -5.0, 5.0}}), [](std::span<const double>, std::vector<double>&) {
    return false;
  });
  CHECK(none.status == FitStatus::kFailed);

  std::vector<Parameter> params{{"x", 0.0, -5.0, 5.0}, {"k", 2.0, 0.0, 10.0, true}};
  const FitResult fixed = least_squares(box(params), [](std::span<const double> x, std::vector<double>& r) {
    r = {x[0] - x[1]};
    return true;
  });
  CHECK(fixed.value("k") == 2.0);
  CHECK(fixed.free_parameters == 1);
  CHECK(fixed.value("x") == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("least_squares: invalid boxes are rejected") {
  auto fn = [](std::span<const double> x, std::vector<double>& r) {
    r = {x[0]};
    return true;
  };
  CHECK_THROWS_AS(least_squares(box({{"x", 20.0, -5.0, 5.0}}), fn), DomainError);
  CHECK_THROWS_AS(least_squares(box({{"x", 1.0, 5.0, -5.0}}), fn), DomainError);
  CHECK_THROWS_AS(least_squares(box({{"x", 1.0, -1.0, 5.0, false, true}}), fn), DomainError);
}

TEST_CASE("gauss_newton_covariance: matches the weighted linear-regression formula") {
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i < 12; ++i) {
    xs.push_back(0.5 * i);
    ys.push_back(1.0 + 2.0 * xs.back() + 0.1 * std::sin(3.0 * i));
  }
  const double sigma = 0.2;
  auto fn = [&](std::span<const double> p, std::vector<double>& r) {
    r.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) r[i] = (p[0] + p[1] * xs[i] - ys[i]) / sigma;
    return true;
  };
  FitProblem p = box({{"a", 0.0, -10.0, 10.0}, {"b", 0.0, -10.0, 10.0}});
  p.options.absolute_sigma = true;
  const FitResult f = least_squares(p, fn);
  Eigen::MatrixXd x(xs.size(), 2);
  for (std::size_t i = 0; i < xs.size(); ++i) x.row(i) << 1.0, xs[i];
  const Eigen::Matrix2d oracle = (x.transpose() * x / (sigma * sigma)).inverse();
  CHECK((f.covariance - oracle).cwiseAbs().maxCoeff() < 1e-6 * oracle.cwiseAbs().maxCoeff());
  CHECK(f.uncertainty("a") == doctest::Approx(std::sqrt(oracle(0, 0))).epsilon(1e-6));
}

TEST_CASE("property: reduced chi^2 averages to 1 over 100 trials with known sigma") {
  std::mt19937_64 rng(17);
  const double sigma = 0.05;
  std::normal_distribution<double> noise(0.0, sigma);
  double sum = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (int i = 0; i < 25; ++i) {
      xs.push_back(0.2 * i);
      ys.push_back(0.5 * std::exp(-0.7 * xs.back()) + 0.1 + noise(rng));
    }
    FitProblem p = box({{"amp", 1.0, 0.0, 5.0}, {"rate", 1.0, 0.01, 10.0, false, true}, {"base", 0.0, -1.0, 1.0}}, 4,
                       static_cast<std::uint64_t>(trial));
    p.options.absolute_sigma = true;
    const FitResult f = least_squares(p, [&](std::span<const double> q, std::vector<double>& r) {
      r.resize(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) r[i] = (q[0] * std::exp(-q[1] * xs[i]) + q[2] - ys[i]) / sigma;
      return true;
    });
    REQUIRE(f.reduced_chi2.has_value());
    sum += *f.reduced_chi2;
  }
  CHECK(sum / 100.0 > 0.8);
  CHECK(sum / 100.0 < 1.2);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> seen(100, 0);
  parallel_for(seen.size(), 3, [&](std::size_t i) { seen[i] += 1; });
  for (int s : seen) CHECK(s == 1);
}
