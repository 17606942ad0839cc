#include <cmath>
#include <random>

#include "doctest.h"
#include "spinclock/relaxation.hpp"

using namespace spinclock;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> log_omegas(double lo, double hi, int n) {
  std::vector<double> w;
  for (int i = 0; i < n; ++i) w.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return w;
}

std::vector<AcPoint> synthesize(const ColeColeParams& p, const std::vector<double>& omegas) {
  std::vector<AcPoint> out;
  for (double w : omegas) {
    const ComplexSusceptibility c = cole_cole_eval(p, w);
    out.push_back({w, c.re, c.im, std::nullopt});
  }
  return out;
}

// chi'(w) - chi_S from chi'' by the Kramers-Kronig relation with the singular
// part subtracted: (2/pi) int_0^inf [u chi''(u) - w chi''(w)] / (u^2 - w^2) du.
double kramers_kronig_real(const ColeColeParams& p, double w) {
  const double chi_w = cole_cole_eval(p, w).im;
  const double a = std::log(w) - 40.0;
  const double b = std::log(w) + 40.0;
  const int n = 80001;
  const double h = (b - a) / n;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double u = std::exp(a + (k + 0.5) * h);  // midpoints never land on u = w
    sum += (u * cole_cole_eval(p, u).im - w * chi_w) / (u * u - w * w) * u;
  }
  return 2.0 / kPi * sum * h;
}

}  // namespace

TEST_CASE("cole_cole_eval: static, Debye-peak and adiabatic limits") {
  const ColeColeParams p{1.0, 0.2, 1e-4, 1.0};
  CHECK(cole_cole_eval(p, 0.0).re == 1.0);
  CHECK(cole_cole_eval(p, 0.0).im == 0.0);
  const ComplexSusceptibility peak = cole_cole_eval(p, 1.0 / p.tau);
  CHECK(peak.im == doctest::Approx(0.4).epsilon(1e-14));
  for (double w : log_omegas(1.0, 1e8, 200)) CHECK(cole_cole_eval(p, w).im <= peak.im + 1e-15);
  CHECK(cole_cole_eval(p, 1e14).re == doctest::Approx(0.2).epsilon(1e-9));
  CHECK_THROWS_AS(cole_cole_eval(p, -1.0), DomainError);
}

TEST_CASE("cole_cole_eval: chi'' is non-negative for random parameters") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double chi_s = u(rng);
    const ColeColeParams p{chi_s + u(rng), chi_s, std::pow(10.0, -6.0 + 5.0 * u(rng)), 0.05 + 0.95 * u(rng)};
    CHECK(cole_cole_eval(p, std::pow(10.0, 8.0 * u(rng))).im >= 0.0);
  }
}

TEST_CASE("property: Kramers-Kronig consistency for the Debye form") {
  const ColeColeParams p{1.0, 0.2, 1e-3, 1.0};
  for (double w : log_omegas(1.0, 1e6, 13)) {
    const double direct = cole_cole_eval(p, w).re - p.chi_s;
    CHECK(kramers_kronig_real(p, w) == doctest::Approx(direct).epsilon(0.01));
  }
}

TEST_CASE("cole_cole_fit: noiseless round trip within 1%") {
  const ColeColeParams truth{1.0, 0.2, 1e-4, 0.97};
  const ColeColeFit f = cole_cole_fit(synthesize(truth, log_omegas(10.0, 1e7, 20)));
  CHECK(f.params.chi_t == doctest::Approx(truth.chi_t).epsilon(0.01));
  CHECK(f.params.chi_s == doctest::Approx(truth.chi_s).epsilon(0.01));
  CHECK(f.params.tau == doctest::Approx(truth.tau).epsilon(0.01));
  CHECK(f.params.beta == doctest::Approx(truth.beta).epsilon(0.01));
  CHECK(f.ssr < 1e-10);
  CHECK(f.tau_identifiable);
  CHECK(f.peak_bracketed);
}

TEST_CASE("cole_cole_fit: scale equivariance") {
  const ColeColeParams truth{0.8, 0.1, 3e-3, 0.9};
  auto data = synthesize(truth, log_omegas(1.0, 1e5, 24));
  const ColeColeFit a = cole_cole_fit(data);
  for (AcPoint& p : data) {
    p.re *= 7.0;
    p.im *= 7.0;
  }
  const ColeColeFit b = cole_cole_fit(data);
  CHECK(b.params.chi_t == doctest::Approx(7.0 * a.params.chi_t).epsilon(1e-6));
  CHECK(b.params.chi_s == doctest::Approx(7.0 * a.params.chi_s).epsilon(1e-6));
  CHECK(b.params.tau == doctest::Approx(a.params.tau).epsilon(1e-6));
  CHECK(b.params.beta == doctest::Approx(a.params.beta).epsilon(1e-6));
}

TEST_CASE("cole_cole_fit: no dispersion leaves tau unidentifiable") {
  std::vector<AcPoint> flat;
  for (double w : log_omegas(10.0, 1e5, 10)) flat.push_back({w, 0.5, 0.0, std::nullopt});
  const ColeColeFit f = cole_cole_fit(flat);
  CHECK_FALSE(f.tau_identifiable);
  CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("cole_cole_fit: unbracketed peak is flagged") {
  const ColeColeParams truth{1.0, 0.2, 1e-2, 1.0};
  const ColeColeFit f = cole_cole_fit(synthesize(truth, log_omegas(1e3, 1e6, 12)));
  CHECK_FALSE(f.peak_bracketed);
  CHECK_FALSE(f.warnings.empty());
  CHECK_THROWS_AS(cole_cole_fit(synthesize(truth, log_omegas(1.0, 10.0, 3))), DomainError);
}

TEST_CASE("cole_cole_fit: 1% noise keeps tau within 5% over 100 trials") {
  const ColeColeParams truth{1.0, 0.2, 1e-4, 0.97};
  const auto clean = synthesize(truth, log_omegas(10.0, 1e7, 20));
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> noise(0.0, 0.01);
  int within = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto data = clean;
    for (AcPoint& p : data) {
      p.re *= 1.0 + noise(rng);
      p.im *= 1.0 + noise(rng);
    }
    const ColeColeFit f = cole_cole_fit(data);
    if (std::abs(f.params.tau / truth.tau - 1.0) < 0.05) ++within;
  }
  CHECK(within == 100);
}

TEST_CASE("cole_cole_fit: reduced chi^2 averages to 1 with the true sigma") {
  const ColeColeParams truth{1.0, 0.2, 1e-4, 0.97};
  const auto clean = synthesize(truth, log_omegas(10.0, 1e7, 20));
  std::mt19937_64 rng(31);
  const double sigma = 0.005;
  std::normal_distribution<double> noise(0.0, sigma);
  double sum = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto data = clean;
    for (AcPoint& p : data) {
      p.re += noise(rng);
      p.im += noise(rng);
      p.sigma = sigma;
    }
    const ColeColeFit f = cole_cole_fit(data);
    REQUIRE(f.reduced_chi2.has_value());
    sum += *f.reduced_chi2;
  }
  CHECK(sum / 100.0 > 0.8);
  CHECK(sum / 100.0 < 1.2);
}

TEST_CASE("t1_eval: power laws and the infinite flag") {
  const T1Model raman{0.0, 300.0};
  CHECK(t1_eval(raman, 2.0).seconds == doctest::Approx(16.0 * t1_eval(raman, 4.0).seconds));
  const T1Model direct{10.0, 0.0};
  CHECK(t1_eval(direct, 4.0).seconds == doctest::Approx(0.5 * t1_eval(direct, 2.0).seconds));
  CHECK(t1_eval(T1Model{}, 2.0).infinite);
  const T1Model mixed{10.0, 300.0};
  const double slope =
      std::log(mixed.rate(2000.0) / mixed.rate(1000.0)) / std::log(2.0);
  CHECK(slope == doctest::Approx(4.0).epsilon(1e-6));
  CHECK_THROWS_AS(t1_eval(mixed, 0.0), DomainError);
}

TEST_CASE("t1_fit: exact round trip, pure Raman and mixed recovery") {
  const T1Model mixed{10.0, 300.0};
  std::vector<T1Point> data;
  for (double t = 2.0; t <= 6.0; t += 0.5) data.push_back({t, t1_eval(mixed, t).seconds, std::nullopt});
  const T1Fit f = t1_fit(data);
  CHECK(f.model.a_direct == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(f.model.a_raman == doctest::Approx(300.0).epsilon(1e-9));
  CHECK(f.warnings.empty());

  const T1Model raman{0.0, 300.0};
  std::vector<T1Point> pure;
  for (double t = 2.0; t <= 6.0; t += 0.5) pure.push_back({t, t1_eval(raman, t).seconds, std::nullopt});
  CHECK(std::abs(t1_fit(pure).model.a_direct) < 1e-9);
  CHECK_THROWS_AS(t1_fit({pure[0], pure[1]}), DomainError);
}

TEST_CASE("t1_fit: a negative best-fit coefficient is clipped with a warning") {
  // Rates that fall faster than T at high temperature push A_dir negative.
  std::vector<T1Point> data;
  for (double t : {2.0, 3.0, 4.0, 5.0}) data.push_back({t, 1.0 / (300.0 * std::pow(t, 4) - 50.0 * t), std::nullopt});
  const T1Fit f = t1_fit(data);
  CHECK(f.model.a_direct == 0.0);
  CHECK(f.model.a_raman > 0.0);
  CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("rabi_frequency: formula value, linearity and zero spin") {
  const RabiFrequency r = rabi_frequency(2.0, 1e-3, 1.0);
  CHECK(r.hertz == doctest::Approx(5.5985e7).epsilon(1e-4));
  CHECK(r.angular == doctest::Approx(2.0 * kPi * r.hertz));
  CHECK(r.period() == doctest::Approx(17.86e-9).epsilon(1e-3));
  CHECK(rabi_frequency(2.0, 2e-3, 1.0).hertz == doctest::Approx(2.0 * r.hertz));
  CHECK(rabi_frequency(2.0, 1e-3, 0.0).hertz == 0.0);
  CHECK_THROWS_AS(rabi_frequency(2.0, 0.0, 1.0), DomainError);
}
