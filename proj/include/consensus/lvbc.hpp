#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "consensus/panel.hpp"

namespace consensus {

inline constexpr std::size_t kNumSignBranches = 2;

/// Latent-group calibration model. Group k maps a true change X to forecasts
/// N(alpha[k][xi] X + beta[k][xi], exp(log_sigma[k])^2), where xi = 1{X > 0}.
/// Each instrument j belongs to group k with probability softmax(logits row j).
///
/// When `pinned` is set, group 0 is held at the identity calibration
/// (alpha = 1, beta = 0 on both branches) and never updated.
struct LvbcParameters {
  std::size_t num_groups = 1;
  bool pinned = true;
  std::vector<std::array<double, kNumSignBranches>> alpha;
  std::vector<std::array<double, kNumSignBranches>> beta;
  std::vector<double> log_sigma;
  std::vector<std::string> instruments;  // row labels of `logits`
  std::vector<double> logits;            // row-major [instruments x num_groups]

  /// All groups at identity calibration with noise scale `sigma`, uniform logits.
  static LvbcParameters identity(std::size_t num_groups, std::vector<std::string> instruments,
                                 bool pinned = true, double sigma = 1.0);

  std::size_t num_instruments() const noexcept { return instruments.size(); }
  double sigma(std::size_t k) const;
  double logit(std::size_t j, std::size_t k) const { return logits[j * num_groups + k]; }
  double& logit(std::size_t j, std::size_t k) { return logits[j * num_groups + k]; }

  /// softmax of logits row j.
  std::vector<double> group_probabilities(std::size_t j) const;
  /// argmax of logits row j.
  std::size_t most_likely_group(std::size_t j) const;
  std::optional<std::size_t> find_instrument(const std::string& id) const;

  void validate() const;
  /// Restores the pinned group's identity calibration.
  void enforce_pin();

  /// Flat view used by the optimiser: alpha, beta, log_sigma, logits.
  std::vector<double> pack() const;
  void unpack(std::span<const double> flat);
};

/// Partial derivatives of the ELBO, shaped like LvbcParameters.
struct LvbcGradient {
  std::vector<std::array<double, kNumSignBranches>> alpha;
  std::vector<std::array<double, kNumSignBranches>> beta;
  std::vector<double> log_sigma;
  std::vector<double> logits;

  /// Same ordering as LvbcParameters::pack.
  std::vector<double> pack() const;
};

struct HyperParams {
  double prior_alpha = 1.0;
  double prior_beta = 0.0;
  double prior_sigma = 2.0;
  double prior_strength = 1e3;  // lambda
  double learning_rate = 1e-4;
  std::size_t minibatch_size = 5000;
  std::size_t max_epochs = 500;
  std::size_t patience = 10;
  std::size_t num_restarts = 10;
  std::uint64_t seed = 0;

  // Inverse inference used to score the validation panel each epoch.
  double validation_lambda0 = 1e-4;
  std::size_t validation_samples = 200;
  std::size_t validation_burn_in = 50;

  void validate() const;
};

/// Prior strengths tried by the fit pipeline; validation RMSE picks one.
inline const std::vector<double> kDefaultLambdaGrid{1e2, 1e3, 1e4, 1e5};

/// Prior penalty Omega: squared distance of every free alpha, beta and every
/// sigma from its prior centre. The pinned group's alpha and beta do not count.
double regularizer(const LvbcParameters& params, const HyperParams& hyper);

/// Sum over the selected entries of sum_k softmax_k(w_j) [-r^2 / (2 sigma_k^2) - ln sigma_k]
/// with r = Xhat_ij - (alpha_{k,xi_i} X_i + beta_{k,xi_i}), minus lambda * Omega
/// scaled by the fraction of entries selected. The scaling makes the objective
/// additive over any partition of the entries. Every entry needs an actual,
/// and every instrument must have a logits row.
double elbo(const LvbcParameters& params, const HyperParams& hyper, const ForecastPanel& panel,
            std::optional<std::span<const std::size_t>> subset = std::nullopt);

/// Exact gradient of `elbo`. Pinned coordinates are zero.
LvbcGradient elbo_gradient(const LvbcParameters& params, const HyperParams& hyper,
                           const ForecastPanel& panel,
                           std::optional<std::span<const std::size_t>> subset = std::nullopt);

/// First-order adaptive-moment optimiser (ascent form).
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::size_t dimension, double learning_rate, double beta1 = 0.9,
                         double beta2 = 0.999, double epsilon = 1e-8);

  /// theta <- theta + lr * mhat / (sqrt(vhat) + eps)
  void ascend(std::span<double> theta, std::span<const double> gradient);

  std::size_t steps() const noexcept { return step_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  std::size_t step_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double neg_elbo = 0.0;  // full training panel
  double valid_rmse = 0.0;
};

struct RestartReport {
  std::size_t restart = 0;
  bool failed = false;
  std::string diagnostic;
  double best_valid_rmse = 0.0;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> trace;
  LvbcParameters params;  // snapshot at best_epoch
};

struct FitResult {
  LvbcParameters params;
  std::size_t best_restart = 0;
  double best_valid_rmse = 0.0;
  std::vector<RestartReport> restarts;
};

/// Draws a starting point near the prior: free alpha ~ N(prior_alpha, 0.1),
/// beta ~ N(prior_beta, 0.1), log sigma = ln prior_sigma, logits ~ N(0, 0.01).
LvbcParameters initial_parameters(std::size_t num_groups, std::vector<std::string> instruments,
                                  bool pinned, const HyperParams& hyper, std::uint64_t seed);

/// Trains `num_restarts` independent runs of minibatched Adam on the negative
/// ELBO with early stopping on validation RMSE, and returns the run with the
/// lowest validation RMSE (ties go to the lower restart index).
/// Throws TrainingFailure when every restart diverges.
FitResult fit(const ForecastPanel& train, const ForecastPanel& valid, std::size_t num_groups,
              const HyperParams& hyper, bool pinned = true);

/// Runs `fit` once per prior strength in `grid` and keeps the result with the
/// lowest validation RMSE (ties go to the earlier grid value).
FitResult fit_over_grid(const ForecastPanel& train, const ForecastPanel& valid,
                        std::size_t num_groups, HyperParams hyper, bool pinned,
                        std::span<const double> grid);

/// RMSE of posterior-mean inverse inference against the panel's actuals.
double validation_rmse(const LvbcParameters& params, const ForecastPanel& panel,
                       double lambda0, std::size_t num_samples, std::size_t burn_in,
                       std::uint64_t seed);

}  // namespace consensus
