#include "cibo/surrogates/lagrangian.hpp"

#include <algorithm>
#include <cmath>

namespace cibo {

void LagrangianParams::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!std::isfinite(gamma) || gamma < 0.0) throw std::invalid_argument("gamma must be finite and >= 0");
  if (!std::isfinite(beta) || beta <= 0.0) throw std::invalid_argument("beta must be finite and > 0");
}

double lagrangian_score(double y, const Vector& c, double lambda) {
  return y - lambda * c.cwiseMax(0.0).sum();
}

double reward_exponent(double mu, double sigma, const Vector& g_hat, const LagrangianParams& params) {
  return mu + params.gamma * sigma - params.lambda * g_hat.cwiseMax(0.0).sum();
}

ScoreScaling ScoreScaling::fit(std::span<const EvalRecord> records, bool indicator_mode) {
  if (records.empty()) throw std::invalid_argument("ScoreScaling::fit: empty dataset");
  const double n = static_cast<double>(records.size());
  ScoreScaling s;
  double mean = 0.0;
  for (const EvalRecord& r : records) mean += r.y;
  mean /= n;
  double var = 0.0;
  for (const EvalRecord& r : records) var += (r.y - mean) * (r.y - mean);
  const double sd = std::sqrt(var / n);
  s.y_mean = mean;
  s.y_scale = sd < 1e-8 ? 1.0 : sd;

  const Eigen::Index m = records.front().c.size();
  s.violation_mean = Vector::Zero(m);
  s.violation_scale = Vector::Ones(m);
  if (!indicator_mode && m > 0) {
    Vector cm = Vector::Zero(m);
    for (const EvalRecord& r : records) cm += r.c;
    cm /= n;
    Vector cv = Vector::Zero(m);
    for (const EvalRecord& r : records) cv += (r.c - cm).cwiseAbs2();
    cv = (cv / n).cwiseSqrt();
    for (Eigen::Index k = 0; k < m; ++k) s.violation_scale[k] = cv[k] < 1e-8 ? 1.0 : cv[k];
    s.violation_mean = cm;
  }
  return s;
}

double ScoreScaling::violation(const Vector& c) const {
  if (violation_scale.size() == 0) return c.cwiseMax(0.0).sum();
  return ((c - violation_mean).array() / violation_scale.array()).max(0.0).sum();
}

Matrix WeightedDataset::inputs() const {
  if (records.empty()) return Matrix(0, 0);
  Matrix x(static_cast<Eigen::Index>(records.size()), records.front().x.size());
  for (std::size_t i = 0; i < records.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = records[i].x.transpose();
  return x;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of an empty set");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& w : out) w /= total;
  return out;
}

WeightedDataset compute_weights(std::vector<EvalRecord> records, double lambda,
                                const ScoreScaling& scaling) {
  if (records.empty()) throw std::invalid_argument("compute_weights: empty dataset");
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const EvalRecord& r : records) scores.push_back(scaling.score(r, lambda));
  WeightedDataset out;
  out.weights = softmax(scores);
  out.records = std::move(records);
  return out;
}

}  // namespace cibo
