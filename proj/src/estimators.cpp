#include "consensus/estimators.hpp"

#include <cmath>
#include <numeric>

#include "consensus/error.hpp"

namespace consensus {

MeasurementBatch::MeasurementBatch(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("measurement batch is empty");
}

MeasurementBatch::MeasurementBatch(std::vector<double> values,
                                   std::vector<std::uint8_t> class_labels)
    : values_(std::move(values)), labels_(std::move(class_labels)) {
  if (values_.empty()) throw InvalidInput("measurement batch is empty");
  if (labels_->size() != values_.size()) {
    throw InvalidInput("class label count " + std::to_string(labels_->size()) +
                       " does not match value count " + std::to_string(values_.size()));
  }
  for (auto z : *labels_) {
    if (z > 1) throw InvalidInput("class labels must be 0 or 1");
  }
}

MeasurementBatch MeasurementBatch::from_groups(std::span<const double> good,
                                               std::span<const double> bad) {
  std::vector<double> values(good.begin(), good.end());
  values.insert(values.end(), bad.begin(), bad.end());
  std::vector<std::uint8_t> labels(good.size(), 0);
  labels.resize(values.size(), 1);
  return MeasurementBatch(std::move(values), std::move(labels));
}

LabelledSums summarize(const MeasurementBatch& batch) {
  if (!batch.has_labels()) throw InvalidInput("estimator requires class labels");
  LabelledSums s;
  const auto& labels = *batch.class_labels();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (labels[i] == 0) {
      s.good_sum += batch.values()[i];
      ++s.good_count;
    } else {
      s.bad_sum += batch.values()[i];
      ++s.bad_count;
    }
  }
  return s;
}

void GroundTruthParams::validate() const {
  if (!(sigma2 > 0.0)) throw InvalidInput("sigma2 must be positive");
  if (!(sigma_star2 > 0.0)) throw InvalidInput("sigma_star2 must be positive");
  if (!(lambda0 > 0.0)) throw InvalidInput("lambda0 must be positive");
  if (m + n < 1) throw InvalidInput("need at least one instrument (m + n >= 1)");
}

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::kNaive: return "NE";
    case EstimatorKind::kConservative: return "CE";
    case EstimatorKind::kGreedy: return "GE";
    case EstimatorKind::kBayesian: return "BE";
  }
  return "?";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  if (name == "NE") return EstimatorKind::kNaive;
  if (name == "CE") return EstimatorKind::kConservative;
  if (name == "GE") return EstimatorKind::kGreedy;
  if (name == "BE") return EstimatorKind::kBayesian;
  throw InvalidInput("unknown estimator kind '" + std::string(name) + "'");
}

double estimate_naive(const MeasurementBatch& batch) {
  const auto& v = batch.values();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double estimate_naive(const LabelledSums& s) {
  const std::size_t total = s.good_count + s.bad_count;
  if (total == 0) throw InvalidInput("measurement batch is empty");
  return (s.good_sum + s.bad_sum) / static_cast<double>(total);
}

double estimate_conservative(const LabelledSums& s) {
  if (s.good_count == 0) throw DegenerateInput("conservative estimator needs a good reading");
  return s.good_sum / static_cast<double>(s.good_count);
}

double estimate_conservative(const MeasurementBatch& batch) {
  return estimate_conservative(summarize(batch));
}

double estimate_greedy(const LabelledSums& s, double alpha, double beta) {
  if (alpha == 0.0) throw SingularCalibration("greedy estimator cannot invert alpha = 0");
  const std::size_t total = s.good_count + s.bad_count;
  if (total == 0) throw InvalidInput("measurement batch is empty");
  const double n = static_cast<double>(s.bad_count);
  return (s.good_sum + (s.bad_sum - n * beta) / alpha) / static_cast<double>(total);
}

double estimate_greedy(const MeasurementBatch& batch, double alpha, double beta) {
  return estimate_greedy(summarize(batch), alpha, beta);
}

double estimate_bayesian(const LabelledSums& s, double alpha, double beta, double lambda0) {
  if (!(lambda0 > 0.0)) throw InvalidInput("lambda0 must be positive");
  const double m = static_cast<double>(s.good_count);
  const double n = static_cast<double>(s.bad_count);
  return (s.good_sum + alpha * s.bad_sum - n * alpha * beta) / (m + n * alpha * alpha + lambda0);
}

double estimate_bayesian(const MeasurementBatch& batch, double alpha, double beta,
                         double lambda0) {
  return estimate_bayesian(summarize(batch), alpha, beta, lambda0);
}

double estimate(EstimatorKind kind, const LabelledSums& s, double alpha, double beta,
                double lambda0) {
  switch (kind) {
    case EstimatorKind::kNaive: return estimate_naive(s);
    case EstimatorKind::kConservative: return estimate_conservative(s);
    case EstimatorKind::kGreedy: return estimate_greedy(s, alpha, beta);
    case EstimatorKind::kBayesian: return estimate_bayesian(s, alpha, beta, lambda0);
  }
  throw InvalidInput("unknown estimator kind");
}

MomentPair analytic_moments(EstimatorKind kind, const GroundTruthParams& p) {
  p.validate();
  const double m = static_cast<double>(p.m);
  const double n = static_cast<double>(p.n);
  const double a = p.alpha;
  switch (kind) {
    case EstimatorKind::kNaive:
      return {n / (m + n) * ((a - 1.0) * p.mu + p.beta),
              (m * p.sigma2 + n * p.sigma_star2) / ((m + n) * (m + n))};
    case EstimatorKind::kConservative:
      if (p.m == 0) throw DegenerateInput("conservative estimator needs m >= 1");
      return {0.0, p.sigma2 / m};
    case EstimatorKind::kGreedy:
      if (a == 0.0) throw SingularCalibration("greedy estimator cannot invert alpha = 0");
      return {0.0, (m * p.sigma2 + n * p.sigma_star2 / (a * a)) / ((m + n) * (m + n))};
    case EstimatorKind::kBayesian: {
      const double denom = m + n * a * a + p.lambda0;
      return {-p.lambda0 * p.mu / denom,
              (m * p.sigma2 + n * a * a * p.sigma_star2) / (denom * denom)};
    }
  }
  throw InvalidInput("unknown estimator kind");
}

std::string_view to_string(Comparison pair) noexcept {
  switch (pair) {
    case Comparison::kGreedyVsConservative: return "GE_vs_CE";
    case Comparison::kBayesVsConservative: return "BE_vs_CE";
    case Comparison::kBayesVsGreedy: return "BE_vs_GE";
  }
  return "?";
}

double dominance_threshold(Comparison pair, std::size_t m, std::size_t n, double alpha) {
  if (m < 1 || n < 1) throw InvalidInput("dominance predicates need m >= 1 and n >= 1");
  const double ratio_nm = static_cast<double>(n) / static_cast<double>(m);
  switch (pair) {
    case Comparison::kGreedyVsConservative:
      return (ratio_nm + 2.0) * alpha * alpha;
    case Comparison::kBayesVsConservative:
      return ratio_nm * alpha * alpha + 2.0;
    case Comparison::kBayesVsGreedy:
      return std::sqrt(1.5 + std::sqrt(2.25 + 2.0 / ratio_nm));
  }
  throw InvalidInput("unknown comparison");
}

bool dominance_predicate(Comparison pair, std::size_t m, std::size_t n, double alpha,
                         double variance_ratio) {
  if (!(variance_ratio > 0.0)) throw InvalidInput("variance ratio must be positive");
  const double threshold = dominance_threshold(pair, m, n, alpha);
  if (pair == Comparison::kBayesVsGreedy) {
    return std::abs(alpha) >= threshold && variance_ratio <= 2.0;
  }
  return variance_ratio <= threshold;
}

}  // namespace consensus
