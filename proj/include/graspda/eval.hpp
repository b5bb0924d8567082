#pragma once

#include "graspda/augment.hpp"
#include "graspda/classify.hpp"
#include "graspda/emg_label.hpp"
#include "graspda/features.hpp"
#include "graspda/rng.hpp"
#include "graspda/signal.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

namespace graspda {

enum class Method : std::uint8_t { CSP, CSP_DA, FBCSP, FBCSP_DA };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);
inline bool uses_augmentation(Method m) { return m == Method::CSP_DA || m == Method::FBCSP_DA; }
inline bool uses_filter_bank(Method m) { return m == Method::FBCSP || m == Method::FBCSP_DA; }
// CSP_DA -> CSP, FBCSP_DA -> FBCSP; identity otherwise.
Method baseline_of(Method m);
inline constexpr Method kAllMethods[] = {Method::CSP, Method::CSP_DA, Method::FBCSP, Method::FBCSP_DA};

struct PipelineParams {
  Band csp_band{8.0, 30.0};
  std::vector<Band> bands = default_filter_bank();
  int filter_order = 4;
  CspParams csp;
  int select_k = 12;  // filter-bank methods only; 0 keeps every feature
  SvmParams svm;
  SegmentGeometry geometry;
  AugmentParams augment;
  int multiplier = 3;
  bool include_originals = true;
  bool normalize_labels = false;
};

struct CvConfig {
  int n_repeats = 5;
  int n_folds = 5;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::uint64_t seed = 1;
  int threads = 1;
  PipelineParams pipeline;
};

// EEG trials of one paradigm with their per-segment EMG labels (measured for
// ME, recalled from ME templates for MI). `labels` may be empty when no
// augmenting method will run.
struct Dataset {
  Paradigm paradigm = Paradigm::ME;
  int sample_rate_hz = 1000;
  std::vector<Trial> trials;
  std::vector<std::vector<EmgLabel>> labels;

  std::vector<int> classes() const;
};

struct PreprocessParams {
  std::vector<std::string> channels;  // EEG whitelist, empty = all
  double emg_notch_hz = 60.0;
  double emg_notch_q = 30.0;
  Band emg_band{10.0, 500.0};
  int emg_filter_order = 4;
  int reference_index = -1;  // -1 = last EMG channel
  bool median_before_segmentation = false;
  int median_kernel = 11;
  double trial_s = 4.0;
};

struct PreparedData {
  std::optional<Dataset> me;
  std::optional<Dataset> mi;
  std::vector<EmgLabel> me_labels;  // flat, every ME trial
  std::vector<LabelTemplate> templates;
};

// Filters EMG, extracts trials, labels ME segments from EMG and MI segments
// from the ME class templates.
PreparedData prepare(const Recording& eeg, const Recording* emg, std::span<const TrialEvent> events,
                     const PreprocessParams& pre, const SegmentGeometry& geometry);

struct FoldSplit {
  std::vector<std::size_t> train;  // dataset indices, ascending
  std::vector<std::size_t> test;
};

// Per class, a seeded shuffle dealt round-robin across folds; the deal
// position carries over between classes so fold sizes stay balanced.
std::vector<FoldSplit> stratified_folds(std::span<const int> classes, int n_folds, Rng& rng);

struct ConfusionMatrix {
  std::vector<int> classes;  // row/column labels, ascending
  Eigen::MatrixXi counts;    // rows = true, cols = predicted

  explicit ConfusionMatrix(std::vector<int> labels = {1, 2, 3, 4, 5});
  void add(int truth, int predicted);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  long total() const;
  double accuracy() const;  // fraction
};

// Bands a method extracts features from: the CSP band, or the filter bank.
// Augmenting methods switch segments separately inside each of these bands.
std::vector<Band> feature_bands(Method m, const PipelineParams& params);

// Per-trial band-passed signals, computed once per dataset. Filtering is
// per trial, so sharing it across folds leaks nothing between them.
class ScatterCache {
 public:
  ScatterCache(const Dataset& ds, std::span<const Band> bands, int filter_order, int threads = 1,
               std::span<const Band> trial_bands = {});
  // Scatter matrix of the band-passed trial.
  const Matrix& get(std::size_t trial_index, const Band& band) const;
  bool has(const Band& band) const;
  // The band-passed trial itself.
  const Trial& filtered(std::size_t trial_index, const Band& band) const;
  bool has_filtered(const Band& band) const;

 private:
  std::vector<Band> bands_;
  std::vector<std::vector<Matrix>> scatter_;  // band x trial
  std::vector<Band> trial_bands_;
  std::vector<std::vector<Trial>> trials_;  // trial band x trial
};

struct FoldResult {
  double accuracy = 0.0;  // percent
  ConfusionMatrix confusion;
  std::vector<std::uint32_t> test_ids;
  std::vector<int> predictions;
  std::size_t bank_entries = 0;
  std::size_t augmented_trials = 0;
  std::size_t training_items = 0;
  std::set<std::uint32_t> provenance_sources;  // every trial an augmented segment came from
};

// Trains on `split.train` (plus label-matched augmentation for *_DA methods,
// built from the training trials only) and scores the untouched test trials.
FoldResult run_fold(const Dataset& ds, const FoldSplit& split, Method method, const PipelineParams& params,
                    std::uint64_t fold_seed, const ScatterCache* cache = nullptr);

struct MethodResult {
  Method method = Method::CSP;
  std::vector<double> fold_accuracies;  // repeat-major
  double mean = 0.0;
  double stddev = 0.0;
  ConfusionMatrix confusion;  // summed over all folds
  std::optional<double> p_vs_baseline;
};

struct ComparisonReport {
  Paradigm paradigm = Paradigm::ME;
  std::vector<MethodResult> methods;
  std::vector<std::vector<FoldSplit>> folds;  // per repeat, shared by all methods
  std::size_t max_bank_entries = 0;
  std::size_t isolation_checks = 0;      // augmented folds whose provenance was re-audited
  std::size_t isolation_violations = 0;  // provenance sources found in a fold's test set

  const MethodResult& at(Method m) const;
};

ComparisonReport run_comparison(const Dataset& ds, const CvConfig& cfg);

// Two-tailed paired t-test on a[i] - b[i]. 1.0 when every difference is
// zero, 0.0 when the differences are constant and non-zero.
double paired_test(std::span<const double> a, std::span<const double> b);

// Accuracy of always predicting the most frequent training class (lowest
// label on ties).
double majority_baseline_accuracy(std::span<const int> train_classes, std::span<const int> test_classes);

// Copy of `ds` with class labels shuffled across trials.
Dataset permute_labels(const Dataset& ds, std::uint64_t seed);

// Filters fitted on every trial of `ds` for one method family, for export.
std::vector<SpatialFilterSet> fit_all_filters(const Dataset& ds, const PipelineParams& params, bool filter_bank);

}  // namespace graspda
