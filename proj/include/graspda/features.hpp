#pragma once

#include "graspda/signal.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <vector>

namespace graspda {

struct Band {
  double low_hz = 8.0;
  double high_hz = 30.0;

  friend bool operator==(const Band&, const Band&) = default;
};

// Nine 4 Hz bands covering 4-40 Hz.
std::vector<Band> default_filter_bank();

// One-vs-rest CSP filters for a single band. Rows are unit-norm spatial
// filters ordered by descending generalized eigenvalue: rows [0, m) hold the
// m largest, rows [m, 2m) the m smallest (last row = smallest).
struct SpatialFilterSet {
  Matrix filters;
  Eigen::VectorXd eigenvalues;
  // Covariance-weighted patterns, (C1 + C2) w per row, unit norm.
  Matrix patterns;
  int target_class = 1;
  Band band;

  Eigen::Index size() const { return filters.rows(); }
};

struct FeatureSlot {
  Band band;
  int target_class = 1;
  int filter_index = 0;
};
using FeatureLayout = std::vector<FeatureSlot>;

struct FeatureVector {
  Eigen::VectorXd values;
  std::shared_ptr<const FeatureLayout> layout;
};

// Row-centered scatter X X^T.
Matrix scatter(const Eigen::Ref<const Matrix>& x);

// Trace-normalized covariance of a row-centered trial.
Matrix trial_covariance(const Eigen::Ref<const Matrix>& trial_data);
Matrix normalize_trace(const Matrix& scatter);

struct CspParams {
  int m = 3;
  double shrinkage = 0.05;
};

SpatialFilterSet csp_fit(std::span<const Matrix> target_trials, std::span<const Matrix> rest_trials,
                         const CspParams& params);

// Same fit from precomputed trace-normalized covariances.
SpatialFilterSet csp_fit_covariances(std::span<const Matrix> target_covs, std::span<const Matrix> rest_covs,
                                     const CspParams& params);

// log(var(w_i X) / sum_j var(w_j X)) per filter row.
Eigen::VectorXd csp_features(const Eigen::Ref<const Matrix>& trial_data, const SpatialFilterSet& fs);
Eigen::VectorXd csp_features_from_scatter(const Matrix& scatter, const SpatialFilterSet& fs);

// Band x class one-vs-rest CSP, ordered by (band, class). Trials are
// band-passed with a zero-phase Butterworth of `filter_order` per band.
std::vector<SpatialFilterSet> fbcsp_fit(const std::map<int, std::vector<Matrix>>& trials_by_class,
                                        int sample_rate_hz, std::span<const Band> bands, const CspParams& params,
                                        int filter_order = 4);

std::shared_ptr<const FeatureLayout> make_layout(std::span<const SpatialFilterSet> sets);

// Concatenated CSP features of one trial across all filter sets. `scatters`
// maps each distinct band of `sets`, in first-appearance order, to the
// trial's scatter matrix in that band.
FeatureVector features_from_scatters(std::span<const Matrix> scatters, std::span<const SpatialFilterSet> sets,
                                     std::shared_ptr<const FeatureLayout> layout);

FeatureVector fbcsp_features(const Matrix& trial_data, int sample_rate_hz, std::span<const SpatialFilterSet> sets,
                             int filter_order = 4);

// Distinct bands of `sets` in first-appearance order.
std::vector<Band> bands_of(std::span<const SpatialFilterSet> sets);

// Mutual information (nats) between a feature discretized into `bins`
// quantile bins and the class label.
double mutual_information(std::span<const double> feature, std::span<const int> classes, int bins = 8);

// Indices of the k features with highest mutual information with the class,
// in descending MI order; ties go to the lower index.
std::vector<std::size_t> select_features(std::span<const FeatureVector> train_features,
                                         std::span<const int> train_classes, int k, int bins = 8);

// CSV `band_low,band_high,target_class,filter_index,eigenvalue,w_1..w_C`.
void write_filters_csv(std::ostream& out, std::span<const SpatialFilterSet> sets, bool header = true);

}  // namespace graspda
