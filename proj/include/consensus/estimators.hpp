#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace consensus {

/// Prior precision used when a caller asks for a "weak prior".
inline constexpr double kWeakPriorPrecision = 1e-4;

/// Readings of one scalar quantity. Label 0 marks a good (unbiased)
/// instrument, label 1 a miscalibrated one.
class MeasurementBatch {
 public:
  explicit MeasurementBatch(std::vector<double> values);
  MeasurementBatch(std::vector<double> values, std::vector<std::uint8_t> class_labels);

  /// Builds a labelled batch with all good readings first.
  static MeasurementBatch from_groups(std::span<const double> good,
                                      std::span<const double> bad);

  const std::vector<double>& values() const noexcept { return values_; }
  const std::optional<std::vector<std::uint8_t>>& class_labels() const noexcept {
    return labels_;
  }
  bool has_labels() const noexcept { return labels_.has_value(); }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
  std::optional<std::vector<std::uint8_t>> labels_;
};

/// Sufficient statistics of a labelled batch: every estimator below is a
/// function of these four numbers.
struct LabelledSums {
  double good_sum = 0.0;
  double bad_sum = 0.0;
  std::size_t good_count = 0;
  std::size_t bad_count = 0;
};

/// Throws InvalidInput if the batch carries no labels.
LabelledSums summarize(const MeasurementBatch& batch);

struct GroundTruthParams {
  double mu = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  double sigma2 = 1.0;
  double sigma_star2 = 1.0;
  std::size_t m = 0;
  std::size_t n = 0;
  double lambda0 = kWeakPriorPrecision;

  void validate() const;
};

struct MomentPair {
  double bias = 0.0;
  double variance = 0.0;

  double mse() const noexcept { return bias * bias + variance; }
};

enum class EstimatorKind { kNaive, kConservative, kGreedy, kBayesian };

/// "NE", "CE", "GE", "BE".
std::string_view to_string(EstimatorKind kind) noexcept;
EstimatorKind parse_estimator_kind(std::string_view name);

double estimate_naive(const MeasurementBatch& batch);
double estimate_conservative(const MeasurementBatch& batch);
double estimate_greedy(const MeasurementBatch& batch, double alpha, double beta);
double estimate_bayesian(const MeasurementBatch& batch, double alpha, double beta,
                         double lambda0 = kWeakPriorPrecision);

// Sum-based forms used by the simulation hot loops.
double estimate_naive(const LabelledSums& s);
double estimate_conservative(const LabelledSums& s);
double estimate_greedy(const LabelledSums& s, double alpha, double beta);
double estimate_bayesian(const LabelledSums& s, double alpha, double beta,
                         double lambda0 = kWeakPriorPrecision);

/// Dispatches on kind; alpha, beta and lambda0 are ignored where unused.
double estimate(EstimatorKind kind, const LabelledSums& s, double alpha, double beta,
                double lambda0 = kWeakPriorPrecision);

/// Closed-form bias and variance of an estimator when m good readings are
/// N(mu, sigma2) and n bad readings are N(alpha*mu + beta, sigma_star2).
MomentPair analytic_moments(EstimatorKind kind, const GroundTruthParams& params);

enum class Comparison { kGreedyVsConservative, kBayesVsConservative, kBayesVsGreedy };

std::string_view to_string(Comparison pair) noexcept;

/// True iff the sufficient condition for MSE(first) <= MSE(second) holds.
/// variance_ratio is sigma_star2 / sigma2. Boundary cases count as true.
bool dominance_predicate(Comparison pair, std::size_t m, std::size_t n, double alpha,
                         double variance_ratio);

/// Right-hand side of the dominance inequality: the largest variance ratio
/// (or, for kBayesVsGreedy, the smallest |alpha|) at which dominance holds.
double dominance_threshold(Comparison pair, std::size_t m, std::size_t n, double alpha);

}  // namespace consensus
