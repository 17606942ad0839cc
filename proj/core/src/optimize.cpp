#include "spinclock/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace spinclock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maps between the unit box of the free parameters and the full parameter vector.
class BoxMap {
 public:
  explicit BoxMap(const std::vector<Parameter>& params) : params_(params) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Parameter& p = params[i];
      if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.upper >= p.lower)) {
        throw DomainError("parameter '" + p.name + "' needs finite bounds with lower <= upper");
      }
      if (p.log_scale && !(p.lower > 0.0)) {
        throw DomainError("log-scale parameter '" + p.name + "' needs lower > 0");
      }
      if (!p.fixed && !(p.init >= p.lower && p.init <= p.upper)) {
        throw DomainError("initial value of '" + p.name + "' lies outside its bounds");
      }
      if (!p.fixed && p.upper > p.lower) free_.push_back(i);
    }
  }

  std::size_t dim() const { return free_.size(); }
  const std::vector<std::size_t>& free() const { return free_; }

  std::vector<double> full(const Eigen::VectorXd& u) const {
    std::vector<double> x(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) x[i] = params_[i].init;
    for (std::size_t k = 0; k < free_.size(); ++k) x[free_[k]] = from_unit(free_[k], u(k));
    return x;
  }

  Eigen::VectorXd unit(std::span<const double> x) const {
    Eigen::VectorXd u(free_.size());
    for (std::size_t k = 0; k < free_.size(); ++k) u(k) = to_unit(free_[k], x[free_[k]]);
    return u;
  }

  double from_unit(std::size_t i, double u) const {
    const Parameter& p = params_[i];
    u = std::clamp(u, 0.0, 1.0);
    double v;
    if (p.log_scale) {
      v = std::exp(std::log(p.lower) + u * (std::log(p.upper) - std::log(p.lower)));
    } else {
      v = p.lower + u * (p.upper - p.lower);
    }
    return std::clamp(v, p.lower, p.upper);
  }

  double to_unit(std::size_t i, double v) const {
    const Parameter& p = params_[i];
    if (p.upper == p.lower) return 0.0;
    if (p.log_scale) {
      return std::clamp((std::log(v) - std::log(p.lower)) / (std::log(p.upper) - std::log(p.lower)),
                        0.0, 1.0);
    }
    return std::clamp((v - p.lower) / (p.upper - p.lower), 0.0, 1.0);
  }

 private:
  const std::vector<Parameter>& params_;
  std::vector<std::size_t> free_;
};

double sum_of_squares(const ResidualFunction& fn, std::span<const double> x, std::vector<double>& r) {
  r.clear();
  if (!fn(x, r)) return kInf;
  double s = 0.0;
  for (double v : r) {
    if (!std::isfinite(v)) return kInf;
    s += v * v;
  }
  return s;
}

struct LocalResult {
  Eigen::VectorXd u;
  double f = kInf;
  int evaluations = 0;
  bool converged = false;
};

// Nelder-Mead in the unit box with projection onto the box, restarted from the
// incumbent until a restart no longer improves it.
LocalResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                        const Eigen::VectorXd& start, double tolerance, int max_evals) {
  const Eigen::Index n = start.size();
  LocalResult best;
  best.u = start;
  best.f = f(start);
  best.evaluations = 1;
  if (n == 0) {
    best.converged = true;
    return best;
  }

  double step = 0.1;
  while (best.evaluations < max_evals) {
    std::vector<Eigen::VectorXd> simplex(n + 1, best.u);
    std::vector<double> fv(n + 1, best.f);
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXd v = best.u;
      v(k) += (v(k) + step <= 1.0) ? step : -step;
      simplex[k + 1] = v.cwiseMax(0.0).cwiseMin(1.0);
      fv[k + 1] = f(simplex[k + 1]);
      ++best.evaluations;
    }
    bool converged = false;
    std::vector<Eigen::Index> order(n + 1);
    while (best.evaluations < max_evals) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
      const Eigen::Index lo = order.front();
      const Eigen::Index hi = order.back();
      const Eigen::Index second = order[n - 1];
      double size = 0.0;
      for (Eigen::Index k = 0; k <= n; ++k) {
        size = std::max(size, (simplex[k] - simplex[lo]).cwiseAbs().maxCoeff());
      }
      const double spread = std::abs(fv[hi] - fv[lo]);
      if ((std::isfinite(fv[hi]) && spread <= tolerance * std::abs(fv[lo]) + 1e-300) || size < 1e-13) {
        converged = true;
        break;
      }
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (Eigen::Index k = 0; k <= n; ++k) {
        if (k != hi) centroid += simplex[k];
      }
      centroid /= static_cast<double>(n);
      auto clip = [](Eigen::VectorXd v) { return Eigen::VectorXd(v.cwiseMax(0.0).cwiseMin(1.0)); };

      const Eigen::VectorXd xr = clip(centroid + (centroid - simplex[hi]));
      const double fr = f(xr);
      ++best.evaluations;
      if (fr < fv[lo]) {
        const Eigen::VectorXd xe = clip(centroid + 2.0 * (centroid - simplex[hi]));
        const double fe = f(xe);
        ++best.evaluations;
        if (fe < fr) {
          simplex[hi] = xe;
          fv[hi] = fe;
        } else {
          simplex[hi] = xr;
          fv[hi] = fr;
        }
        continue;
      }
      if (fr < fv[second]) {
        simplex[hi] = xr;
        fv[hi] = fr;
        continue;
      }
      const bool outside = fr < fv[hi];
      const Eigen::VectorXd xc = outside ? clip(centroid + 0.5 * (xr - centroid))
                                         : clip(centroid + 0.5 * (simplex[hi] - centroid));
      const double fc = f(xc);
      ++best.evaluations;
      if (fc < (outside ? fr : fv[hi])) {
        simplex[hi] = xc;
        fv[hi] = fc;
        continue;
      }
      for (Eigen::Index k = 0; k <= n; ++k) {
        if (k == lo) continue;
        simplex[k] = simplex[lo] + 0.5 * (simplex[k] - simplex[lo]);
        fv[k] = f(simplex[k]);
        ++best.evaluations;
      }
    }
    const auto lo = std::min_element(fv.begin(), fv.end()) - fv.begin();
    const double previous = best.f;
    if (fv[lo] < best.f) {
      best.f = fv[lo];
      best.u = simplex[lo];
    }
    best.converged = converged;
    if (!converged) break;
    // Restart with a smaller simplex; stop once a restart brings nothing.
    const bool improved = previous - best.f > tolerance * std::abs(best.f) + 1e-300;
    if (!improved && step < 0.1) break;
    step = improved ? 0.1 : 0.01;
    if (!improved) continue;
  }
  return best;
}

double halton(std::size_t index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

std::string to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kConverged:
      return "converged";
    case FitStatus::kMaxEvaluations:
      return "max_evaluations";
    case FitStatus::kFailed:
      return "failed";
  }
  return "failed";
}

double FitResult::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return best[i];
  }
  throw DomainError("fit result has no parameter '" + name + "'");
}

double FitResult::uncertainty(const std::string& name) const {
  for (std::size_t i = 0; i < free_names.size(); ++i) {
    if (free_names[i] == name && covariance.rows() > static_cast<Eigen::Index>(i)) {
      const double v = covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
      return v >= 0.0 ? std::sqrt(v) : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Eigen::MatrixXd gauss_newton_covariance(const std::vector<Parameter>& parameters,
                                        std::span<const double> params,
                                        const ResidualFunction& residuals, double scale) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    if (!parameters[i].fixed && parameters[i].upper > parameters[i].lower) free.push_back(i);
  }
  std::vector<double> base;
  std::vector<double> x(params.begin(), params.end());
  if (!std::isfinite(sum_of_squares(residuals, x, base))) return {};
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(base.size()), static_cast<Eigen::Index>(free.size()));
  std::vector<double> up;
  std::vector<double> down;
  for (std::size_t k = 0; k < free.size(); ++k) {
    const std::size_t i = free[k];
    const Parameter& p = parameters[i];
    const double h = std::min(1e-6 * std::max(std::abs(x[i]), 1e-3 * (p.upper - p.lower)),
                              0.5 * (p.upper - p.lower));
    // Stay inside the box: one-sided differences on an active bound.
    std::vector<double> xp = x;
    std::vector<double> xm = x;
    xp[i] = std::min(x[i] + h, p.upper);
    xm[i] = std::max(x[i] - h, p.lower);
    if (!std::isfinite(sum_of_squares(residuals, xp, up)) ||
        !std::isfinite(sum_of_squares(residuals, xm, down)) || up.size() != base.size() ||
        down.size() != base.size()) {
      return {};
    }
    const double span = xp[i] - xm[i];
    for (std::size_t r = 0; r < base.size(); ++r) {
      jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = (up[r] - down[r]) / span;
    }
  }
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
  return scale * cod.pseudoInverse();
}

FitResult least_squares(const FitProblem& problem, const ResidualFunction& residuals) {
  const auto& params = problem.parameters;
  const OptimizerOptions& opt = problem.options;
  const BoxMap box(params);
  const std::size_t dim = box.dim();

  std::vector<Eigen::VectorXd> starts;
  if (!problem.explicit_starts.empty()) {
    for (const auto& s : problem.explicit_starts) {
      if (s.size() != params.size()) throw DomainError("explicit start has the wrong length");
      starts.push_back(box.unit(s));
    }
  } else {
    std::vector<double> init(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) init[i] = params[i].init;
    starts.push_back(box.unit(init));
    std::mt19937_64 rng(opt.seed);
    Eigen::VectorXd shift(dim);
    for (std::size_t k = 0; k < dim; ++k) shift(k) = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    for (int s = 1; s < std::max(1, opt.starts); ++s) {
      Eigen::VectorXd u(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        const double h = halton(static_cast<std::size_t>(s), kPrimes[k % std::size(kPrimes)]);
        u(k) = std::fmod(h + shift(k), 1.0);
      }
      starts.push_back(u);
    }
  }

  FitResult result;
  for (const auto& p : params) result.names.push_back(p.name);
  for (std::size_t i : box.free()) result.free_names.push_back(params[i].name);
  result.free_parameters = dim;
  result.starts.resize(starts.size());

  parallel_for(starts.size(), opt.threads, [&](std::size_t s) {
    std::vector<double> scratch;
    auto objective = [&](const Eigen::VectorXd& u) {
      return sum_of_squares(residuals, box.full(u), scratch);
    };
    const LocalResult local = nelder_mead(objective, starts[s], opt.tolerance, opt.max_evaluations);
    StartOutcome& out = result.starts[s];
    out.start = box.full(starts[s]);
    out.params = box.full(local.u);
    out.ssr = local.f;
    out.evaluations = local.evaluations;
    out.status = !std::isfinite(local.f) ? FitStatus::kFailed
                 : local.converged       ? FitStatus::kConverged
                                         : FitStatus::kMaxEvaluations;
  });

  std::size_t best = result.starts.size();
  for (std::size_t s = 0; s < result.starts.size(); ++s) {
    if (result.starts[s].status == FitStatus::kFailed) continue;
    if (best == result.starts.size() || result.starts[s].ssr < result.starts[best].ssr) best = s;
  }
  if (best == result.starts.size()) {
    result.status = FitStatus::kFailed;
    result.warnings.emplace_back("all starts failed: the model was never finite");
    return result;
  }
  result.best = result.starts[best].params;
  result.ssr = result.starts[best].ssr;
  result.status = result.starts[best].status;
  sum_of_squares(residuals, result.best, result.residuals);
  result.points = result.residuals.size();

  const double dof = static_cast<double>(result.points) - static_cast<double>(dim);
  double scale = 1.0;
  if (opt.absolute_sigma) {
    if (dof > 0) result.reduced_chi2 = result.ssr / dof;
  } else {
    scale = dof > 0 ? result.ssr / dof : 0.0;
  }
  result.covariance = gauss_newton_covariance(params, result.best, residuals, scale);
  if (result.status == FitStatus::kMaxEvaluations) {
    result.warnings.emplace_back("best start stopped at the evaluation limit");
  }
  return result;
}

}  // namespace spinclock
