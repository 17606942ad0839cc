#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinclock/error.hpp"

namespace spinclock {

struct Parameter {
  std::string name;
  double init = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  bool fixed = false;
  /// Search in log space (requires lower > 0).
  bool log_scale = false;
};

/// Fills `residuals` for the full parameter vector. Return false (or produce
/// non-finite residuals) to reject a trial point.
using ResidualFunction =
    std::function<bool(std::span<const double> params, std::vector<double>& residuals)>;

struct OptimizerOptions {
  int starts = 16;
  std::uint64_t seed = 1;
  /// Stop when the simplex residual spread falls below tolerance * best.
  double tolerance = 1e-10;
  int max_evaluations = 2000;  // per start
  unsigned threads = 1;
  /// Residuals are already divided by sigma: report reduced chi^2 and use the
  /// unscaled Gauss-Newton covariance.
  bool absolute_sigma = false;
};

struct FitProblem {
  std::vector<Parameter> parameters;
  OptimizerOptions options;
  /// Replaces the low-discrepancy starts when non-empty (full parameter vectors).
  std::vector<std::vector<double>> explicit_starts;
};

enum class FitStatus { kConverged, kMaxEvaluations, kFailed };

struct StartOutcome {
  std::vector<double> start;
  std::vector<double> params;
  double ssr = 0.0;
  int evaluations = 0;
  FitStatus status = FitStatus::kFailed;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> best;
  double ssr = 0.0;
  std::size_t points = 0;
  std::size_t free_parameters = 0;
  std::vector<double> residuals;
  std::vector<StartOutcome> starts;
  Eigen::MatrixXd covariance;  // free parameters only, in `names` order of free ones
  std::vector<std::string> free_names;
  std::optional<double> reduced_chi2;
  FitStatus status = FitStatus::kFailed;
  Warnings warnings;

  double value(const std::string& name) const;
  /// sqrt of the covariance diagonal for a free parameter (NaN when unavailable).
  double uncertainty(const std::string& name) const;
};

std::string to_string(FitStatus status);

/// Bounded multi-start Nelder-Mead on the sum of squared residuals. Starts are the
/// initial guess plus shifted Halton points of the box; each start descends
/// monotonically; the best start wins with ties going to the lowest index.
/// Deterministic for a given seed regardless of thread count.
FitResult least_squares(const FitProblem& problem, const ResidualFunction& residuals);

/// Gauss-Newton covariance of the free parameters at `params`.
Eigen::MatrixXd gauss_newton_covariance(const std::vector<Parameter>& parameters,
                                        std::span<const double> params,
                                        const ResidualFunction& residuals, double scale);

/// Runs fn(i) for i in [0, n) on at most `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace spinclock
