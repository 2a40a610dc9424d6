#include "cibo/surrogates/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cibo/numerics/adam.hpp"

namespace cibo {

Normalizer Normalizer::fit(const Matrix& data, double floor) {
  if (data.rows() == 0) throw std::invalid_argument("Normalizer::fit: no rows");
  require_finite(data, "normalizer input");
  Normalizer n;
  n.mean = data.colwise().mean();
  const Matrix centered = data.rowwise() - n.mean;
  n.scale = (centered.array().square().colwise().sum() / static_cast<double>(data.rows())).sqrt();
  n.scale = n.scale.cwiseMax(floor);
  return n;
}

Normalizer Normalizer::identity(Eigen::Index cols) {
  return {Eigen::RowVectorXd::Zero(cols), Eigen::RowVectorXd::Ones(cols)};
}

Matrix Normalizer::normalize(const Matrix& v) const {
  if (v.cols() != mean.size()) throw ShapeError("normalize: got " + shape_string(v));
  return (v.rowwise() - mean).array().rowwise() / scale.array();
}

Matrix Normalizer::denormalize(const Matrix& v) const {
  if (v.cols() != mean.size()) throw ShapeError("denormalize: got " + shape_string(v));
  return (v.array().rowwise() * scale.array()).matrix().rowwise() + mean;
}

void SurrogateConfig::validate() const {
  if (ensemble_size < 2) throw std::invalid_argument("surrogate ensemble_size must be >= 2");
  if (hidden_layers == 0 || hidden_units == 0) throw std::invalid_argument("surrogate network must have hidden units");
  if (epochs == 0 || batch_size == 0) throw std::invalid_argument("surrogate epochs and batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("surrogate learning_rate must be > 0");
  }
}

std::vector<double> train_weighted_regressor(MlpNet& net, const Matrix& x, const Vector& target,
                                             const Vector& multiplier, std::size_t epochs,
                                             std::size_t batch_size, double learning_rate,
                                             RandomSource& rng, const std::string& label) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (target.size() != x.rows() || multiplier.size() != x.rows()) {
    throw ShapeError("train_weighted_regressor: inputs, targets and multipliers disagree");
  }
  AdamConfig ac;
  ac.learning_rate = learning_rate;
  Adam opt(net.parameters(), ac);
  std::vector<double> history;
  history.reserve(epochs);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const std::vector<std::size_t> order = rng.permutation(n);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t stop = std::min(n, start + batch_size);
      const auto b = static_cast<Eigen::Index>(stop - start);
      Matrix xb(b, x.cols());
      Matrix tb(b, 1);
      Matrix mb(b, 1);
      for (Eigen::Index i = 0; i < b; ++i) {
        const auto src = static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]);
        xb.row(i) = x.row(src);
        tb(i, 0) = target[src];
        mb(i, 0) = multiplier[src];
      }
      Tape tape;
      Var pred = net.forward(tape, tape.constant(std::move(xb)));
      Var err = ad::square(ad::sub(pred, tape.constant(std::move(tb))));
      Var loss = ad::mean(ad::mul(err, tape.constant(std::move(mb))));
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << label << ": non-finite training loss at epoch " << epoch + 1;
        throw NumericsError(msg.str());
      }
      opt.zero_grad();
      tape.backward(loss);
      opt.step();
      total += value;
      ++batches;
    }
    history.push_back(total / static_cast<double>(batches));
  }
  return history;
}

SurrogateEnsemble::SurrogateEnsemble(std::vector<MlpNet> objective, std::vector<MlpNet> constraints,
                                     Normalizer x, Normalizer y, Normalizer c)
    : objective_(std::move(objective)),
      constraints_(std::move(constraints)),
      x_norm_(std::move(x)),
      y_norm_(std::move(y)),
      c_norm_(std::move(c)) {
  if (objective_.size() < 2) throw std::invalid_argument("ensemble needs at least two objective members");
  if (y_norm_.mean.size() != 1 || c_norm_.mean.size() != static_cast<Eigen::Index>(constraints_.size())) {
    throw ShapeError("ensemble normalizers do not match the networks");
  }
}

SurrogateEnsemble SurrogateEnsemble::fit(const WeightedDataset& data, const SurrogateConfig& config,
                                         const RandomSource& rng, FitReport* report) {
  config.validate();
  if (data.records.empty()) throw std::invalid_argument("fit_surrogates: empty dataset");
  if (data.weights.size() != data.records.size()) throw ShapeError("fit_surrogates: weights/records mismatch");

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    if (data.weights[i] < 0.0 || !std::isfinite(data.weights[i])) {
      throw std::invalid_argument("fit_surrogates: weights must be finite and nonnegative");
    }
    if (data.weights[i] > 0.0) keep.push_back(i);
  }
  if (keep.empty()) throw std::invalid_argument("fit_surrogates: all weights are zero");

  const auto n = static_cast<Eigen::Index>(keep.size());
  const Eigen::Index dim = data.records.front().x.size();
  const Eigen::Index m = data.records.front().c.size();
  Matrix x(n, dim), y(n, 1), c(n, m);
  Vector mult(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const EvalRecord& r = data.records[keep[static_cast<std::size_t>(i)]];
    if (r.x.size() != dim || r.c.size() != m) throw ShapeError("fit_surrogates: ragged records");
    x.row(i) = r.x.transpose();
    y(i, 0) = r.y;
    c.row(i) = r.c.transpose();
    mult[i] = static_cast<double>(n) * data.weights[keep[static_cast<std::size_t>(i)]];
  }

  Normalizer xn = Normalizer::fit(x);
  Normalizer yn = Normalizer::fit(y);
  Normalizer cn = config.indicator_mode || m == 0 ? Normalizer::identity(m) : Normalizer::fit(c);
  const Matrix xs = xn.normalize(x);
  const Matrix ys = yn.normalize(y);
  const Matrix cs = cn.normalize(c);

  const std::vector<std::size_t> widths =
      MlpShape{static_cast<std::size_t>(dim), config.hidden_layers, config.hidden_units, 1}.widths();
  const std::size_t k = config.ensemble_size;
  if (report) report->epoch_losses.clear();

  std::vector<MlpNet> objective;
  for (std::size_t j = 0; j < k; ++j) {
    RandomSource net_rng = rng.fork(j);
    objective.emplace_back(widths, net_rng);
    auto hist = train_weighted_regressor(objective.back(), xs, ys.col(0), mult, config.epochs,
                                         config.batch_size, config.learning_rate, net_rng,
                                         "objective proxy " + std::to_string(j));
    if (report) report->epoch_losses.push_back(std::move(hist));
  }
  std::vector<MlpNet> constraints;
  for (Eigen::Index j = 0; j < m; ++j) {
    RandomSource net_rng = rng.fork(k + static_cast<std::size_t>(j));
    constraints.emplace_back(widths, net_rng);
    auto hist = train_weighted_regressor(constraints.back(), xs, cs.col(j), mult, config.epochs,
                                         config.batch_size, config.learning_rate, net_rng,
                                         "constraint proxy " + std::to_string(j));
    if (report) report->epoch_losses.push_back(std::move(hist));
  }
  return SurrogateEnsemble(std::move(objective), std::move(constraints), std::move(xn), std::move(yn),
                           std::move(cn));
}

void SurrogateEnsemble::require_trained() const {
  if (!trained()) throw std::logic_error("surrogate ensemble used before training");
}

SurrogateEnsemble::ObjectivePrediction SurrogateEnsemble::predict_objective(const Matrix& x) const {
  require_trained();
  const Matrix xs = x_norm_.normalize(x);
  const auto k = static_cast<Eigen::Index>(objective_.size());
  Matrix preds(x.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    preds.col(j) = y_norm_.denormalize(objective_[static_cast<std::size_t>(j)].forward(xs)).col(0);
  }
  ObjectivePrediction out;
  out.mean = preds.rowwise().mean();
  const Matrix centered = preds.colwise() - out.mean;
  out.std = (centered.array().square().rowwise().sum() / static_cast<double>(k)).sqrt();
  return out;
}

Matrix SurrogateEnsemble::predict_constraints(const Matrix& x) const {
  require_trained();
  const Matrix xs = x_norm_.normalize(x);
  const auto m = static_cast<Eigen::Index>(constraints_.size());
  Matrix out(x.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) out.col(j) = constraints_[static_cast<std::size_t>(j)].forward(xs).col(0);
  return c_norm_.denormalize(out);
}

Vector SurrogateEnsemble::reward(const Matrix& x, const LagrangianParams& params,
                                 const ScoreScaling& scaling) const {
  const ObjectivePrediction obj = predict_objective(x);
  const Matrix g = predict_constraints(x);
  Vector r(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Vector gi = g.row(i).transpose();
    if (scaling.violation_scale.size() == gi.size()) {
      gi = (gi - scaling.violation_mean).cwiseQuotient(scaling.violation_scale);
    }
    r[i] = reward_exponent(scaling.objective(obj.mean[i]), scaling.objective_spread(obj.std[i]), gi, params);
  }
  return r;
}

}  // namespace cibo
