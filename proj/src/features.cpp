#include "graspda/features.hpp"

#include "graspda/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace graspda {

std::vector<Band> default_filter_bank() {
  std::vector<Band> bands;
  for (int lo = 4; lo < 40; lo += 4) bands.push_back({static_cast<double>(lo), static_cast<double>(lo + 4)});
  return bands;
}

Matrix scatter(const Eigen::Ref<const Matrix>& x) {
  if (x.cols() < 2) throw InvalidParameter("covariance needs at least 2 samples");
  const Matrix centered = x.colwise() - x.rowwise().mean();
  Matrix s = Matrix::Zero(x.rows(), x.rows());
  s.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  return s.selfadjointView<Eigen::Lower>();
}

Matrix normalize_trace(const Matrix& s) {
  const double tr = s.trace();
  if (!std::isfinite(tr)) throw NumericError("non-finite covariance");
  if (!(tr > 0.0)) throw DegenerateInput("zero-variance trial (covariance trace is 0)");
  return s / tr;
}

Matrix trial_covariance(const Eigen::Ref<const Matrix>& trial_data) {
  if (trial_data.rows() < 2) throw InvalidParameter("covariance needs at least 2 channels");
  return normalize_trace(scatter(trial_data));
}

namespace {

Matrix mean_of(std::span<const Matrix> mats) {
  Matrix acc = mats.front();
  for (std::size_t i = 1; i < mats.size(); ++i) acc += mats[i];
  return acc / static_cast<double>(mats.size());
}

Matrix shrink(const Matrix& c, double gamma) {
  const auto n = static_cast<double>(c.rows());
  Matrix out = (1.0 - gamma) * c;
  out.diagonal().array() += gamma * c.trace() / n;
  return out;
}

}  // namespace

SpatialFilterSet csp_fit_covariances(std::span<const Matrix> target_covs, std::span<const Matrix> rest_covs,
                                     const CspParams& params) {
  if (target_covs.empty() || rest_covs.empty()) throw InvalidParameter("CSP needs trials on both sides");
  const Eigen::Index channels = target_covs.front().rows();
  if (params.m < 1 || 2 * params.m > channels) throw InvalidParameter("CSP needs 1 <= m and 2m <= channels");
  if (!(params.shrinkage >= 0.0 && params.shrinkage <= 1.0)) throw InvalidParameter("shrinkage must lie in [0, 1]");

  const Matrix c1 = shrink(mean_of(target_covs), params.shrinkage);
  const Matrix c2 = shrink(mean_of(rest_covs), params.shrinkage);
  if (!c1.allFinite() || !c2.allFinite()) throw NumericError("non-finite class covariance");
  const Matrix composite = c1 + c2;

  // Whitening of the composite covariance.
  Eigen::SelfAdjointEigenSolver<Matrix> comp(composite);
  if (comp.info() != Eigen::Success) throw DegenerateInput("eigensolver failed on composite covariance");
  const Eigen::VectorXd d = comp.eigenvalues();
  if (!(d.minCoeff() > d.maxCoeff() * 1e-14)) throw DegenerateInput("composite covariance is singular");
  const Matrix whitening = d.cwiseSqrt().cwiseInverse().asDiagonal() * comp.eigenvectors().transpose();

  Matrix s1 = whitening * c1 * whitening.transpose();
  s1 = 0.5 * (s1 + s1.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(s1);
  if (es.info() != Eigen::Success) throw DegenerateInput("eigensolver failed on whitened covariance");
  const Matrix all = es.eigenvectors().transpose() * whitening;  // ascending eigenvalues

  const int m = params.m;
  std::vector<Eigen::Index> pick;
  for (int i = 0; i < m; ++i) pick.push_back(channels - 1 - i);
  for (int i = m - 1; i >= 0; --i) pick.push_back(i);

  SpatialFilterSet fs;
  fs.filters.resize(2 * m, channels);
  fs.patterns.resize(2 * m, channels);
  fs.eigenvalues.resize(2 * m);
  for (int r = 0; r < 2 * m; ++r) {
    Eigen::VectorXd w = all.row(pick[r]).transpose();
    w.normalize();
    Eigen::Index arg = 0;
    w.cwiseAbs().maxCoeff(&arg);
    if (w(arg) < 0) w = -w;
    const Eigen::VectorXd cw = composite * w;
    fs.filters.row(r) = w.transpose();
    fs.patterns.row(r) = cw.normalized().transpose();
    fs.eigenvalues(r) = w.dot(c1 * w) / w.dot(cw);
  }
  if (!fs.filters.allFinite()) throw NumericError("non-finite CSP filter");
  return fs;
}

SpatialFilterSet csp_fit(std::span<const Matrix> target_trials, std::span<const Matrix> rest_trials,
                         const CspParams& params) {
  std::vector<Matrix> t, r;
  for (const auto& x : target_trials) t.push_back(trial_covariance(x));
  for (const auto& x : rest_trials) r.push_back(trial_covariance(x));
  return csp_fit_covariances(t, r, params);
}

Eigen::VectorXd csp_features_from_scatter(const Matrix& s, const SpatialFilterSet& fs) {
  if (s.rows() != fs.filters.cols()) throw InvalidParameter("trial channel count does not match filters");
  Eigen::VectorXd var = (fs.filters * s).cwiseProduct(fs.filters).rowwise().sum();
  const double total = var.sum();
  if (!(total > 0.0)) throw DegenerateInput("zero projected variance");
  // Rank-deficient trials (noiseless data) put some filters in the null
  // space, where rounding can leave a zero or slightly negative variance.
  var = var.cwiseMax(total * 1e-12);
  return (var / var.sum()).array().log().matrix();
}

Eigen::VectorXd csp_features(const Eigen::Ref<const Matrix>& trial_data, const SpatialFilterSet& fs) {
  return csp_features_from_scatter(scatter(trial_data), fs);
}

std::vector<SpatialFilterSet> fbcsp_fit(const std::map<int, std::vector<Matrix>>& trials_by_class,
                                        int sample_rate_hz, std::span<const Band> bands, const CspParams& params,
                                        int filter_order) {
  if (bands.empty()) throw InvalidParameter("filter bank is empty");
  if (trials_by_class.size() < 2) throw InvalidParameter("one-vs-rest CSP needs at least two classes");
  for (const auto& [cls, trials] : trials_by_class) {
    if (trials.empty()) throw InvalidParameter("class " + std::to_string(cls) + " has no trials");
  }
  std::vector<SpatialFilterSet> out;
  for (const auto& band : bands) {
    std::map<int, std::vector<Matrix>> covs;
    for (const auto& [cls, trials] : trials_by_class) {
      for (const auto& x : trials) {
        covs[cls].push_back(trial_covariance(bandpass(x, sample_rate_hz, band.low_hz, band.high_hz, filter_order)));
      }
    }
    for (const auto& [cls, target] : covs) {
      std::vector<Matrix> rest;
      for (const auto& [other, c] : covs) {
        if (other != cls) rest.insert(rest.end(), c.begin(), c.end());
      }
      SpatialFilterSet fs = csp_fit_covariances(target, rest, params);
      fs.target_class = cls;
      fs.band = band;
      out.push_back(std::move(fs));
    }
  }
  return out;
}

std::vector<Band> bands_of(std::span<const SpatialFilterSet> sets) {
  std::vector<Band> bands;
  for (const auto& s : sets) {
    if (std::find(bands.begin(), bands.end(), s.band) == bands.end()) bands.push_back(s.band);
  }
  return bands;
}

std::shared_ptr<const FeatureLayout> make_layout(std::span<const SpatialFilterSet> sets) {
  auto layout = std::make_shared<FeatureLayout>();
  for (const auto& s : sets) {
    for (Eigen::Index i = 0; i < s.size(); ++i) layout->push_back({s.band, s.target_class, static_cast<int>(i)});
  }
  return layout;
}

FeatureVector features_from_scatters(std::span<const Matrix> scatters, std::span<const SpatialFilterSet> sets,
                                     std::shared_ptr<const FeatureLayout> layout) {
  const auto bands = bands_of(sets);
  if (scatters.size() != bands.size()) throw InvalidParameter("one scatter matrix per band is required");
  FeatureVector fv;
  fv.layout = std::move(layout);
  Eigen::Index total = 0;
  for (const auto& s : sets) total += s.size();
  fv.values.resize(total);
  Eigen::Index at = 0;
  for (const auto& s : sets) {
    const auto b = std::find(bands.begin(), bands.end(), s.band) - bands.begin();
    fv.values.segment(at, s.size()) = csp_features_from_scatter(scatters[b], s);
    at += s.size();
  }
  return fv;
}

FeatureVector fbcsp_features(const Matrix& trial_data, int sample_rate_hz, std::span<const SpatialFilterSet> sets,
                             int filter_order) {
  std::vector<Matrix> scatters;
  for (const auto& b : bands_of(sets)) {
    scatters.push_back(scatter(bandpass(trial_data, sample_rate_hz, b.low_hz, b.high_hz, filter_order)));
  }
  return features_from_scatters(scatters, sets, make_layout(sets));
}

double mutual_information(std::span<const double> feature, std::span<const int> classes, int bins) {
  if (feature.size() != classes.size()) throw InvalidParameter("feature and class vectors differ in length");
  if (bins < 1) throw InvalidParameter("bin count must be positive");
  const std::size_t n = feature.size();
  if (n == 0) return 0.0;

  // Type-1 quantile edges: smallest value whose empirical CDF reaches b/bins.
  std::vector<double> sorted(feature.begin(), feature.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int b = 1; b < bins; ++b) {
    const auto rank = static_cast<std::size_t>(std::ceil(static_cast<double>(b) * n / bins));
    edges.push_back(sorted[std::max<std::size_t>(rank, 1) - 1]);
  }

  std::vector<int> class_ids(classes.begin(), classes.end());
  std::sort(class_ids.begin(), class_ids.end());
  class_ids.erase(std::unique(class_ids.begin(), class_ids.end()), class_ids.end());

  std::vector<double> joint(static_cast<std::size_t>(bins) * class_ids.size(), 0.0);
  std::vector<double> pb(bins, 0.0), pc(class_ids.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto bin = std::lower_bound(edges.begin(), edges.end(), feature[i]) - edges.begin();
    const auto c = std::lower_bound(class_ids.begin(), class_ids.end(), classes[i]) - class_ids.begin();
    joint[bin * class_ids.size() + c] += 1.0;
    pb[bin] += 1.0;
    pc[c] += 1.0;
  }
  const auto total = static_cast<double>(n);
  double mi = 0.0;
  for (int b = 0; b < bins; ++b) {
    for (std::size_t c = 0; c < class_ids.size(); ++c) {
      const double j = joint[b * class_ids.size() + c];
      if (j == 0.0) continue;
      mi += (j / total) * std::log((j / total) / ((pb[b] / total) * (pc[c] / total)));
    }
  }
  return std::max(mi, 0.0);
}

std::vector<std::size_t> select_features(std::span<const FeatureVector> train_features,
                                         std::span<const int> train_classes, int k, int bins) {
  if (k <= 0) throw InvalidParameter("number of selected features must be positive");
  if (train_features.empty()) throw InvalidParameter("no training features");
  if (train_features.size() != train_classes.size()) throw InvalidParameter("features and classes differ in count");
  const auto dim = static_cast<std::size_t>(train_features.front().values.size());
  if (static_cast<std::size_t>(k) > dim) throw InvalidParameter("k exceeds feature dimension");
  {
    auto c = std::vector<int>(train_classes.begin(), train_classes.end());
    std::sort(c.begin(), c.end());
    if (std::unique(c.begin(), c.end()) - c.begin() < 2) throw InvalidParameter("feature selection needs >= 2 classes");
  }
  std::vector<double> mi(dim);
  std::vector<double> column(train_features.size());
  for (std::size_t d = 0; d < dim; ++d) {
    for (std::size_t i = 0; i < train_features.size(); ++i) column[i] = train_features[i].values(d);
    mi[d] = mutual_information(column, train_classes, bins);
  }
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mi[a] > mi[b]; });
  order.resize(k);
  return order;
}

void write_filters_csv(std::ostream& out, std::span<const SpatialFilterSet> sets, bool header) {
  const Eigen::Index channels = sets.empty() ? 0 : sets.front().filters.cols();
  if (header) {
    out << "band_low,band_high,target_class,filter_index,eigenvalue";
    for (Eigen::Index c = 1; c <= channels; ++c) out << ",w_" << c;
    out << '\n';
  }
  char buf[40];
  for (const auto& s : sets) {
    for (Eigen::Index r = 0; r < s.size(); ++r) {
      std::snprintf(buf, sizeof buf, "%g,%g,", s.band.low_hz, s.band.high_hz);
      out << buf << s.target_class << ',' << r;
      std::snprintf(buf, sizeof buf, ",%.12g", s.eigenvalues(r));
      out << buf;
      for (Eigen::Index c = 0; c < s.filters.cols(); ++c) {
        std::snprintf(buf, sizeof buf, ",%.12g", s.filters(r, c));
        out << buf;
      }
      out << '\n';
    }
  }
}

}  // namespace graspda
