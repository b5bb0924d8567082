#include "graspda/classify.hpp"

#include "graspda/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <istream>
#include <ostream>

namespace graspda {

BinaryMachine train_binary(const Matrix& x, std::span<const int> y, const SvmParams& params) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (static_cast<Eigen::Index>(y.size()) != n) throw InvalidParameter("label count does not match rows");
  if (!(params.c_reg > 0.0)) throw InvalidParameter("c_reg must be positive");
  if (params.max_iter < 1) throw InvalidParameter("max_iter must be positive");

  Eigen::Index n_pos = 0;
  for (int v : y) {
    if (v != 1 && v != -1) throw InvalidParameter("binary labels must be +1 or -1");
    n_pos += v == 1;
  }
  const Eigen::Index n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InvalidTrainingSet("binary machine needs both positive and negative samples");

  Matrix xa(n, d + 1);
  xa.leftCols(d) = x;
  xa.col(d).setOnes();
  Eigen::VectorXd yv(n), omega(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    yv(i) = y[i];
    omega(i) = y[i] == 1 ? 0.5 / static_cast<double>(n_pos) : 0.5 / static_cast<double>(n_neg);
  }
  // Per-sample signed weight folded into the design matrix.
  const Eigen::VectorXd wy = omega.cwiseProduct(yv);

  const double lambda = 1.0 / params.c_reg;
  const double radius = std::sqrt(2.0 / lambda);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd best = v;
  double best_obj = std::numeric_limits<double>::infinity();

  BinaryMachine out;
  out.objective_trace.reserve(params.max_iter);
  Eigen::VectorXd margins(n), active(n), grad(d + 1);
  int t = 1;
  for (; t <= params.max_iter; ++t) {
    margins.noalias() = xa * v;
    margins = margins.cwiseProduct(yv);
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double slack = 1.0 - margins(i);
      active(i) = slack > 0.0 ? wy(i) : 0.0;
      if (slack > 0.0) hinge += omega(i) * slack;
    }
    const double obj = 0.5 * lambda * v.squaredNorm() + hinge;
    if (obj < best_obj) {
      best_obj = obj;
      best = v;
    }
    out.objective_trace.push_back(best_obj);

    grad.noalias() = -(xa.transpose() * active);
    grad += lambda * v;
    if (grad.norm() <= params.tol) break;
    v -= grad / (lambda * t);
    const double norm = v.norm();
    if (norm > radius) v *= radius / norm;
  }
  out.iterations = std::min(t, params.max_iter);
  out.w = best.head(d);
  out.b = best(d);
  return out;
}

LinearModel train(std::span<const FeatureVector> features, std::span<const int> classes, const SvmParams& params,
                  std::span<const std::size_t> selected) {
  if (features.empty()) throw InvalidTrainingSet("no training samples");
  if (features.size() != classes.size()) throw InvalidParameter("features and classes differ in count");
  const auto input_dim = features.front().values.size();

  LinearModel model;
  model.input_dim = static_cast<std::uint32_t>(input_dim);
  if (selected.empty()) {
    for (Eigen::Index i = 0; i < input_dim; ++i) model.selected.push_back(static_cast<std::uint32_t>(i));
  } else {
    for (auto i : selected) {
      if (static_cast<Eigen::Index>(i) >= input_dim) throw InvalidParameter("selected feature index out of range");
      model.selected.push_back(static_cast<std::uint32_t>(i));
    }
  }
  const auto d = static_cast<Eigen::Index>(model.selected.size());
  const auto n = static_cast<Eigen::Index>(features.size());

  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = features[i].values;
    if (v.size() != input_dim) throw InvalidParameter("feature vectors differ in dimension");
    if (!v.allFinite()) throw NumericError("non-finite training feature");
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = v(model.selected[j]);
  }

  model.classes.assign(classes.begin(), classes.end());
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  if (model.classes.size() < 2) throw InvalidTrainingSet("training set contains a single class");

  model.mean = x.colwise().mean().transpose();
  model.stddev = ((x.rowwise() - model.mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(model.stddev(j) > 1e-12)) model.stddev(j) = 1.0;
  }
  const Matrix z = (x.rowwise() - model.mean.transpose()).array().rowwise() / model.stddev.transpose().array();

  model.weights.resize(static_cast<Eigen::Index>(model.classes.size()), d);
  model.biases.resize(static_cast<Eigen::Index>(model.classes.size()));
  std::vector<int> y(classes.size());
  for (std::size_t k = 0; k < model.classes.size(); ++k) {
    for (std::size_t i = 0; i < classes.size(); ++i) y[i] = classes[i] == model.classes[k] ? 1 : -1;
    const BinaryMachine m = train_binary(z, y, params);
    model.weights.row(static_cast<Eigen::Index>(k)) = m.w.transpose();
    model.biases(static_cast<Eigen::Index>(k)) = m.b;
  }
  return model;
}

Prediction predict(const LinearModel& model, const FeatureVector& feature) {
  if (feature.values.size() != static_cast<Eigen::Index>(model.input_dim)) {
    throw InvalidParameter("feature dimension " + std::to_string(feature.values.size()) + " does not match model (" +
                           std::to_string(model.input_dim) + ")");
  }
  const auto d = static_cast<Eigen::Index>(model.selected.size());
  Eigen::VectorXd z(d);
  for (Eigen::Index j = 0; j < d; ++j) z(j) = (feature.values(model.selected[j]) - model.mean(j)) / model.stddev(j);
  Prediction p;
  p.scores = model.weights * z + model.biases;
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.scores.size(); ++k) {
    if (p.scores(k) > p.scores(best)) best = k;
  }
  p.class_label = model.classes[best];
  return p;
}

namespace {

static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("truncated model blob");
  return v;
}

constexpr std::array<char, 4> kMagic{'G', 'D', 'M', 'D'};

}  // namespace

void write_model(std::ostream& out, const LinearModel& model) {
  const auto d = static_cast<Eigen::Index>(model.selected.size());
  out.write(kMagic.data(), 4);
  put<std::uint16_t>(out, kModelVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.classes.size()));
  put<std::uint32_t>(out, model.input_dim);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (auto s : model.selected) put<std::uint32_t>(out, s);
  for (Eigen::Index j = 0; j < d; ++j) put<double>(out, model.mean(j));
  for (Eigen::Index j = 0; j < d; ++j) put<double>(out, model.stddev(j));
  for (std::size_t k = 0; k < model.classes.size(); ++k) {
    put<std::int32_t>(out, model.classes[k]);
    for (Eigen::Index j = 0; j < d; ++j) put<double>(out, model.weights(static_cast<Eigen::Index>(k), j));
    put<double>(out, model.biases(static_cast<Eigen::Index>(k)));
  }
  if (!out) throw IoError("failed writing model");
}

LinearModel read_model(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw ParseError("not a model blob (bad magic)");
  if (const auto v = get<std::uint16_t>(in); v != kModelVersion) {
    throw ParseError("unsupported model version " + std::to_string(v));
  }
  LinearModel m;
  const auto n_classes = get<std::uint32_t>(in);
  m.input_dim = get<std::uint32_t>(in);
  const auto d = static_cast<Eigen::Index>(get<std::uint32_t>(in));
  for (Eigen::Index j = 0; j < d; ++j) {
    m.selected.push_back(get<std::uint32_t>(in));
    if (m.selected.back() >= m.input_dim) throw ParseError("selected index out of range");
  }
  m.mean.resize(d);
  m.stddev.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) m.mean(j) = get<double>(in);
  for (Eigen::Index j = 0; j < d; ++j) m.stddev(j) = get<double>(in);
  m.weights.resize(n_classes, d);
  m.biases.resize(n_classes);
  for (std::uint32_t k = 0; k < n_classes; ++k) {
    m.classes.push_back(get<std::int32_t>(in));
    for (Eigen::Index j = 0; j < d; ++j) m.weights(k, j) = get<double>(in);
    m.biases(k) = get<double>(in);
  }
  return m;
}

}  // namespace graspda
