#include "graspda/eval.hpp"

#include "graspda/error.hpp"
#include "graspda/parallel.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace graspda {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::CSP: return "CSP";
    case Method::CSP_DA: return "CSP_DA";
    case Method::FBCSP: return "FBCSP";
    case Method::FBCSP_DA: return "FBCSP_DA";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (Method m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw ParseError("unknown method '" + std::string(s) + "' (expected CSP, CSP_DA, FBCSP or FBCSP_DA)");
}

Method baseline_of(Method m) {
  if (m == Method::CSP_DA) return Method::CSP;
  if (m == Method::FBCSP_DA) return Method::FBCSP;
  return m;
}

std::vector<int> Dataset::classes() const {
  std::vector<int> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.class_label);
  return out;
}

PreparedData prepare(const Recording& eeg_in, const Recording* emg_in, std::span<const TrialEvent> events,
                     const PreprocessParams& pre, const SegmentGeometry& geometry) {
  eeg_in.validate();
  Recording eeg = select_channels(eeg_in, pre.channels);
  if (pre.median_before_segmentation) eeg.samples = median_smooth(eeg.samples, pre.median_kernel);

  std::vector<TrialEvent> me_events, mi_events;
  for (const auto& e : events) (e.paradigm == Paradigm::ME ? me_events : mi_events).push_back(e);

  PreparedData out;
  auto make = [&](Paradigm p, std::span<const TrialEvent> ev) {
    Dataset ds;
    ds.paradigm = p;
    ds.sample_rate_hz = eeg.sample_rate_hz;
    ds.trials = extract_trials(eeg, ev, pre.trial_s);
    return ds;
  };
  if (!me_events.empty()) out.me = make(Paradigm::ME, me_events);
  if (!mi_events.empty()) out.mi = make(Paradigm::MI, mi_events);

  if (emg_in != nullptr && out.me) {
    emg_in->validate();
    if (emg_in->sample_rate_hz != eeg.sample_rate_hz || emg_in->length() != eeg.length()) {
      throw InvalidParameter("EEG and EMG recordings must share sample rate and length");
    }
    Recording emg = notch(*emg_in, pre.emg_notch_hz, pre.emg_notch_q);
    emg = bandpass(emg, pre.emg_band.low_hz, pre.emg_band.high_hz, pre.emg_filter_order);
    const int ref = pre.reference_index < 0 ? static_cast<int>(emg.channels()) - 1 : pre.reference_index;
    const auto emg_trials = extract_trials(emg, me_events, pre.trial_s);
    for (const auto& t : emg_trials) {
      auto labels = label_trial(t, geometry, ref);
      out.me_labels.insert(out.me_labels.end(), labels.begin(), labels.end());
      out.me->labels.push_back(std::move(labels));
    }
    if (out.mi) {
      out.templates = build_templates(out.me_labels, static_cast<int>(geometry.count(out.me->trials.front().length())));
      for (const auto& t : out.mi->trials) out.mi->labels.push_back(assign_mi_labels(t, out.templates));
    }
  }
  return out;
}

std::vector<FoldSplit> stratified_folds(std::span<const int> classes, int n_folds, Rng& rng) {
  if (n_folds < 2) throw InvalidParameter("need at least 2 folds");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < classes.size(); ++i) by_class[classes[i]].push_back(i);
  for (const auto& [cls, idx] : by_class) {
    if (static_cast<int>(idx.size()) < n_folds) {
      throw InvalidParameter("class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                             " trials, fewer than " + std::to_string(n_folds) + " folds");
    }
  }
  std::vector<std::vector<std::size_t>> test(n_folds);
  std::size_t deal = 0;
  for (auto& [cls, idx] : by_class) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(idx[i - 1], idx[pick(rng)]);
    }
    for (std::size_t j : idx) test[deal++ % n_folds].push_back(j);
  }
  std::vector<FoldSplit> folds(n_folds);
  for (int f = 0; f < n_folds; ++f) {
    std::sort(test[f].begin(), test[f].end());
    folds[f].test = test[f];
    for (int g = 0; g < n_folds; ++g) {
      if (g != f) folds[f].train.insert(folds[f].train.end(), test[g].begin(), test[g].end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

ConfusionMatrix::ConfusionMatrix(std::vector<int> labels)
    : classes(std::move(labels)),
      counts(Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(classes.size()),
                                   static_cast<Eigen::Index>(classes.size()))) {}

void ConfusionMatrix::add(int truth, int predicted) {
  const auto row = std::find(classes.begin(), classes.end(), truth) - classes.begin();
  const auto col = std::find(classes.begin(), classes.end(), predicted) - classes.begin();
  if (row >= static_cast<long>(classes.size()) || col >= static_cast<long>(classes.size())) {
    throw InvalidParameter("class label outside the confusion matrix");
  }
  ++counts(row, col);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.classes != classes) throw InvalidParameter("confusion matrices have different classes");
  counts += other.counts;
  return *this;
}

long ConfusionMatrix::total() const { return counts.sum(); }

double ConfusionMatrix::accuracy() const {
  const long t = total();
  return t == 0 ? 0.0 : static_cast<double>(counts.trace()) / static_cast<double>(t);
}

std::vector<Band> feature_bands(Method m, const PipelineParams& params) {
  if (!uses_filter_bank(m)) return {params.csp_band};
  if (params.bands.empty()) throw InvalidParameter("filter bank is empty");
  return params.bands;
}

namespace {

Trial filtered_trial(const Trial& t, const Band& band, int order) {
  return Trial::make(t.trial_id, t.class_label, t.paradigm, t.sample_rate_hz,
                     bandpass(t.data(), t.sample_rate_hz, band.low_hz, band.high_hz, order));
}

}  // namespace

ScatterCache::ScatterCache(const Dataset& ds, std::span<const Band> bands, int filter_order, int threads,
                           std::span<const Band> trial_bands)
    : bands_(bands.begin(), bands.end()), trial_bands_(trial_bands.begin(), trial_bands.end()) {
  scatter_.assign(bands_.size(), std::vector<Matrix>(ds.trials.size()));
  trials_.assign(trial_bands_.size(), std::vector<Trial>(ds.trials.size()));
  parallel_for(ds.trials.size(), threads, [&](std::size_t i) {
    for (std::size_t b = 0; b < bands_.size(); ++b) {
      scatter_[b][i] = scatter(
          bandpass(ds.trials[i].data(), ds.sample_rate_hz, bands_[b].low_hz, bands_[b].high_hz, filter_order));
    }
    for (std::size_t b = 0; b < trial_bands_.size(); ++b) {
      trials_[b][i] = filtered_trial(ds.trials[i], trial_bands_[b], filter_order);
    }
  });
}

bool ScatterCache::has_filtered(const Band& band) const {
  return std::find(trial_bands_.begin(), trial_bands_.end(), band) != trial_bands_.end();
}

const Trial& ScatterCache::filtered(std::size_t trial_index, const Band& band) const {
  const auto it = std::find(trial_bands_.begin(), trial_bands_.end(), band);
  if (it == trial_bands_.end()) throw InvalidParameter("trial band not cached");
  return trials_[it - trial_bands_.begin()].at(trial_index);
}

bool ScatterCache::has(const Band& band) const {
  return std::find(bands_.begin(), bands_.end(), band) != bands_.end();
}

const Matrix& ScatterCache::get(std::size_t trial_index, const Band& band) const {
  const auto it = std::find(bands_.begin(), bands_.end(), band);
  if (it == bands_.end()) throw InvalidParameter("band not cached");
  return scatter_[it - bands_.begin()].at(trial_index);
}

namespace {

struct TrainingItem {
  int class_label;
  std::vector<Matrix> scatters;  // per band
};

std::vector<Matrix> cached_scatters(const Dataset& ds, std::size_t i, std::span<const Band> bands,
                                    const PipelineParams& params, const ScatterCache* cache) {
  std::vector<Matrix> out;
  out.reserve(bands.size());
  for (const auto& b : bands) {
    if (cache != nullptr && cache->has(b)) {
      out.push_back(cache->get(i, b));
    } else {
      out.push_back(scatter(bandpass(ds.trials[i].data(), ds.sample_rate_hz, b.low_hz, b.high_hz, params.filter_order)));
    }
  }
  return out;
}

std::vector<SpatialFilterSet> fit_sets(std::span<const TrainingItem> items, std::span<const Band> bands,
                                       const CspParams& csp) {
  std::vector<int> classes;
  for (const auto& it : items) classes.push_back(it.class_label);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw InvalidTrainingSet("training set contains a single class");

  std::vector<SpatialFilterSet> sets;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    std::vector<Matrix> covs;
    covs.reserve(items.size());
    for (const auto& it : items) covs.push_back(normalize_trace(it.scatters[b]));
    for (int cls : classes) {
      std::vector<Matrix> target, rest;
      for (std::size_t i = 0; i < items.size(); ++i) (items[i].class_label == cls ? target : rest).push_back(covs[i]);
      SpatialFilterSet fs = csp_fit_covariances(target, rest, csp);
      fs.target_class = cls;
      fs.band = bands[b];
      sets.push_back(std::move(fs));
    }
  }
  return sets;
}

}  // namespace

FoldResult run_fold(const Dataset& ds, const FoldSplit& split, Method method, const PipelineParams& params,
                    std::uint64_t fold_seed, const ScatterCache* cache) {
  std::set<std::uint32_t> train_ids, test_ids;
  for (std::size_t i : split.train) train_ids.insert(ds.trials.at(i).trial_id);
  for (std::size_t i : split.test) test_ids.insert(ds.trials.at(i).trial_id);
  for (std::uint32_t id : test_ids) {
    if (train_ids.contains(id)) throw IsolationViolation("trial " + std::to_string(id) + " is in both train and test");
  }

  const std::vector<Band> bands = feature_bands(method, params);
  FoldResult result;
  std::vector<TrainingItem> items;

  const bool augment = uses_augmentation(method);
  if (!augment || params.include_originals) {
    for (std::size_t i : split.train) {
      items.push_back({ds.trials[i].class_label, cached_scatters(ds, i, bands, params, cache)});
    }
  }

  if (augment) {
    if (ds.labels.size() != ds.trials.size()) {
      throw IncompleteLabels("augmentation needs segment labels for every trial of the " +
                             std::string(to_string(ds.paradigm)) + " dataset");
    }
    std::vector<EmgLabel> train_labels;
    for (std::size_t i : split.train) train_labels.insert(train_labels.end(), ds.labels[i].begin(), ds.labels[i].end());
    if (params.normalize_labels) normalize_labels(train_labels, label_scale(train_labels));

    // Switching happens separately inside every feature band: switching the
    // raw or broadband trial would smear the steps at segment seams into all
    // bands. Positions and replacements depend only on labels and the fold
    // seed, so every band switches the same segments.
    const std::size_t first_aug = items.size();
    for (std::size_t b = 0; b < bands.size(); ++b) {
      const bool cached = cache != nullptr && cache->has_filtered(bands[b]);
      std::vector<Trial> train_trials;
      train_trials.reserve(split.train.size());
      for (std::size_t i : split.train) {
        train_trials.push_back(cached ? cache->filtered(i, bands[b])
                                      : filtered_trial(ds.trials[i], bands[b], params.filter_order));
      }
      const SegmentBank bank = build_bank(train_trials, train_labels, params.geometry);
      audit_bank(bank, test_ids);
      result.bank_entries = bank.entries.size();

      std::size_t k = first_aug;
      for_each_augmented(train_trials, bank, params.multiplier, params.augment, fold_seed, [&](AugmentedTrial&& a) {
        audit_augmented(std::span<const AugmentedTrial>(&a, 1), train_ids, test_ids);
        for (const auto& p : a.provenance) result.provenance_sources.insert(p.source_trial_id);
        if (b == 0) {
          items.push_back({a.class_label, std::vector<Matrix>(bands.size())});
          ++result.augmented_trials;
        }
        items.at(k++).scatters[b] = scatter(a.data);
      });
    }
  }
  if (items.empty()) throw InvalidTrainingSet("fold has no training data");
  result.training_items = items.size();

  const auto sets = fit_sets(items, bands, params.csp);
  const auto layout = make_layout(sets);
  std::vector<FeatureVector> train_fv;
  std::vector<int> train_classes;
  train_fv.reserve(items.size());
  for (const auto& it : items) {
    train_fv.push_back(features_from_scatters(it.scatters, sets, layout));
    train_classes.push_back(it.class_label);
  }

  std::vector<std::size_t> selected;
  const auto dim = static_cast<int>(layout->size());
  if (uses_filter_bank(method) && params.select_k > 0 && params.select_k < dim) {
    selected = select_features(train_fv, train_classes, params.select_k);
  }
  const LinearModel model = train(train_fv, train_classes, params.svm, selected);

  std::vector<int> labels = model.classes;
  for (std::size_t i : split.test) labels.push_back(ds.trials[i].class_label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  result.confusion = ConfusionMatrix(labels);
  for (std::size_t i : split.test) {
    const FeatureVector fv = features_from_scatters(cached_scatters(ds, i, bands, params, cache), sets, layout);
    const int pred = predict(model, fv).class_label;
    result.confusion.add(ds.trials[i].class_label, pred);
    result.test_ids.push_back(ds.trials[i].trial_id);
    result.predictions.push_back(pred);
  }
  result.accuracy = 100.0 * result.confusion.accuracy();
  return result;
}

const MethodResult& ComparisonReport::at(Method m) const {
  for (const auto& r : methods) {
    if (r.method == m) return r;
  }
  throw InvalidParameter("method " + std::string(to_string(m)) + " not in report");
}

ComparisonReport run_comparison(const Dataset& ds, const CvConfig& cfg) {
  if (cfg.n_repeats < 1) throw InvalidParameter("need at least one repeat");
  if (cfg.methods.empty()) throw InvalidParameter("no methods requested");
  ComparisonReport report;
  report.paradigm = ds.paradigm;

  const auto classes = ds.classes();
  for (int r = 0; r < cfg.n_repeats; ++r) {
    Rng rng = make_rng(cfg.seed, {100, static_cast<std::uint64_t>(r)});
    report.folds.push_back(stratified_folds(classes, cfg.n_folds, rng));
  }

  std::vector<Band> bands;
  for (Method m : cfg.methods) {
    for (const auto& b : feature_bands(m, cfg.pipeline)) {
      if (std::find(bands.begin(), bands.end(), b) == bands.end()) bands.push_back(b);
    }
  }
  // Band-passed trials are kept only for single-band augmentation; holding
  // the whole filter bank would cost bands x the raw dataset in memory.
  std::vector<Band> trial_bands;
  if (std::find(cfg.methods.begin(), cfg.methods.end(), Method::CSP_DA) != cfg.methods.end()) {
    trial_bands.push_back(cfg.pipeline.csp_band);
  }
  const ScatterCache cache(ds, bands, cfg.pipeline.filter_order, cfg.threads, trial_bands);

  const std::size_t per_method = static_cast<std::size_t>(cfg.n_repeats) * cfg.n_folds;
  std::vector<FoldResult> results(cfg.methods.size() * per_method);
  parallel_for(results.size(), cfg.threads, [&](std::size_t job) {
    const std::size_t mi = job / per_method;
    const std::size_t r = (job % per_method) / cfg.n_folds;
    const std::size_t f = job % cfg.n_folds;
    const std::uint64_t fold_seed = substream_seed(cfg.seed, {200, r, f});
    results[job] = run_fold(ds, report.folds[r][f], cfg.methods[mi], cfg.pipeline, fold_seed, &cache);
  });

  std::vector<int> labels = classes;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    MethodResult mr;
    mr.method = cfg.methods[mi];
    mr.confusion = ConfusionMatrix(labels);
    for (std::size_t j = 0; j < per_method; ++j) {
      const FoldResult& fr = results[mi * per_method + j];
      mr.fold_accuracies.push_back(fr.accuracy);
      mr.confusion += fr.confusion;
      report.max_bank_entries = std::max(report.max_bank_entries, fr.bank_entries);
      if (uses_augmentation(mr.method)) {
        const FoldSplit& split = report.folds[j / cfg.n_folds][j % cfg.n_folds];
        for (std::size_t t : split.test) report.isolation_violations += fr.provenance_sources.count(ds.trials[t].trial_id);
        ++report.isolation_checks;
      }
    }
    const auto n = static_cast<double>(mr.fold_accuracies.size());
    mr.mean = std::accumulate(mr.fold_accuracies.begin(), mr.fold_accuracies.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : mr.fold_accuracies) ss += (a - mr.mean) * (a - mr.mean);
    mr.stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    report.methods.push_back(std::move(mr));
  }
  for (auto& mr : report.methods) {
    if (!uses_augmentation(mr.method)) continue;
    for (const auto& other : report.methods) {
      if (other.method == baseline_of(mr.method)) mr.p_vs_baseline = paired_test(mr.fold_accuracies, other.fold_accuracies);
    }
  }
  return report;
}

double paired_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidParameter("paired samples differ in length");
  if (a.size() < 2) throw InvalidParameter("paired test needs at least 2 pairs");
  const auto n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  bool all_zero = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    all_zero = all_zero && d == 0.0;
    ss += (d - mean) * (d - mean);
  }
  if (all_zero) return 1.0;
  const double sd = std::sqrt(ss / (n - 1));
  if (sd == 0.0 || sd <= 1e-15 * std::abs(mean)) return 0.0;
  const double t = mean / (sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

double majority_baseline_accuracy(std::span<const int> train_classes, std::span<const int> test_classes) {
  if (train_classes.empty() || test_classes.empty()) throw InvalidParameter("empty class list");
  std::map<int, int> counts;
  for (int c : train_classes) ++counts[c];
  int best = counts.begin()->first;
  for (const auto& [c, n] : counts) {
    if (n > counts[best]) best = c;
  }
  const auto hits = std::count(test_classes.begin(), test_classes.end(), best);
  return static_cast<double>(hits) / static_cast<double>(test_classes.size());
}

Dataset permute_labels(const Dataset& ds, std::uint64_t seed) {
  Dataset out = ds;
  std::vector<int> classes = ds.classes();
  Rng rng = make_rng(seed, {300});
  for (std::size_t i = classes.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(classes[i - 1], classes[pick(rng)]);
  }
  for (std::size_t i = 0; i < out.trials.size(); ++i) {
    out.trials[i].class_label = classes[i];
    if (i < out.labels.size()) {
      for (auto& l : out.labels[i]) l.class_label = classes[i];
    }
  }
  return out;
}

std::vector<SpatialFilterSet> fit_all_filters(const Dataset& ds, const PipelineParams& params, bool filter_bank) {
  const std::vector<Band> bands = filter_bank ? params.bands : std::vector<Band>{params.csp_band};
  std::vector<TrainingItem> items;
  for (std::size_t i = 0; i < ds.trials.size(); ++i) {
    items.push_back({ds.trials[i].class_label, cached_scatters(ds, i, bands, params, nullptr)});
  }
  return fit_sets(items, bands, params.csp);
}

}  // namespace graspda
