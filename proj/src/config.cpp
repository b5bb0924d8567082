#include "graspda/config.hpp"

#include "graspda/error.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>

namespace graspda {
namespace {

using nlohmann::json;

void require_keys(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ParseError("config section '" + std::string(section) + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError("unknown config key '" + std::string(section) + "." + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config key '") + key + "': " + e.what());
  }
}

Band band_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError("a band must be a [low, high] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json band_to(const Band& b) { return json::array({b.low_hz, b.high_hz}); }

}  // namespace

SynthConfig synth_from_json(const json& j) {
  require_keys(j, "synth",
               {"n_classes", "trials_per_class", "eeg_channels", "emg_channels", "sample_rate_hz", "trial_s", "gap_s",
                "snr_db", "noise_free", "sources_per_class", "pattern_spread", "background_fraction", "artifact_fraction", "artifacts_per_trial", "emg_noise", "line_noise_amp",
                "include_mi", "seed"});
  SynthConfig c;
  read(j, "n_classes", c.n_classes);
  read(j, "trials_per_class", c.trials_per_class);
  read(j, "eeg_channels", c.eeg_channels);
  read(j, "emg_channels", c.emg_channels);
  read(j, "sample_rate_hz", c.sample_rate_hz);
  read(j, "trial_s", c.trial_s);
  read(j, "gap_s", c.gap_s);
  read(j, "snr_db", c.snr_db);
  read(j, "noise_free", c.noise_free);
  read(j, "sources_per_class", c.sources_per_class);
  read(j, "pattern_spread", c.pattern_spread);
  read(j, "background_fraction", c.background_fraction);
  read(j, "artifact_fraction", c.artifact_fraction);
  read(j, "artifacts_per_trial", c.artifacts_per_trial);
  read(j, "emg_noise", c.emg_noise);
  read(j, "line_noise_amp", c.line_noise_amp);
  read(j, "include_mi", c.include_mi);
  read(j, "seed", c.seed);
  c.validate();
  return c;
}

json synth_to_json(const SynthConfig& c) {
  return {{"n_classes", c.n_classes},
          {"trials_per_class", c.trials_per_class},
          {"eeg_channels", c.eeg_channels},
          {"emg_channels", c.emg_channels},
          {"sample_rate_hz", c.sample_rate_hz},
          {"trial_s", c.trial_s},
          {"gap_s", c.gap_s},
          {"snr_db", c.snr_db},
          {"noise_free", c.noise_free},
          {"sources_per_class", c.sources_per_class},
          {"pattern_spread", c.pattern_spread},
          {"background_fraction", c.background_fraction},
          {"artifact_fraction", c.artifact_fraction},
          {"artifacts_per_trial", c.artifacts_per_trial},
          {"emg_noise", c.emg_noise},
          {"line_noise_amp", c.line_noise_amp},
          {"include_mi", c.include_mi},
          {"seed", c.seed}};
}

RunConfig config_from_json(const json& j) {
  require_keys(j, "<root>", {"io", "preprocess", "segment", "augment", "features", "classify", "eval", "synth"});
  RunConfig c;
  if (j.contains("io")) {
    const json& s = j["io"];
    require_keys(s, "io", {"eeg", "emg", "events", "out", "export_augmented"});
    read(s, "eeg", c.io.eeg);
    read(s, "emg", c.io.emg);
    read(s, "events", c.io.events);
    read(s, "out", c.io.out);
    read(s, "export_augmented", c.io.export_augmented);
  }
  if (j.contains("preprocess")) {
    const json& s = j["preprocess"];
    require_keys(s, "preprocess",
                 {"eeg_band", "filter_order", "channels", "emg_notch_hz", "emg_notch_q", "emg_band", "emg_filter_order",
                  "reference_channel", "median_kernel", "median_before_segmentation"});
    if (s.contains("eeg_band")) c.eeg_band = band_from(s["eeg_band"]);
    read(s, "filter_order", c.filter_order);
    read(s, "channels", c.preprocess.channels);
    read(s, "emg_notch_hz", c.preprocess.emg_notch_hz);
    read(s, "emg_notch_q", c.preprocess.emg_notch_q);
    if (s.contains("emg_band")) c.preprocess.emg_band = band_from(s["emg_band"]);
    read(s, "emg_filter_order", c.preprocess.emg_filter_order);
    read(s, "reference_channel", c.preprocess.reference_index);
    read(s, "median_kernel", c.preprocess.median_kernel);
    read(s, "median_before_segmentation", c.preprocess.median_before_segmentation);
  }
  if (j.contains("segment")) {
    const json& s = j["segment"];
    require_keys(s, "segment", {"window_ms", "step_ms", "trial_s"});
    read(s, "window_ms", c.window_ms);
    read(s, "step_ms", c.step_ms);
    read(s, "trial_s", c.preprocess.trial_s);
  }
  if (j.contains("augment")) {
    const json& s = j["augment"];
    require_keys(s, "augment", {"ratio", "multiplier", "include_originals", "normalize_labels"});
    read(s, "ratio", c.ratio);
    read(s, "multiplier", c.multiplier);
    read(s, "include_originals", c.include_originals);
    read(s, "normalize_labels", c.normalize_labels);
  }
  if (j.contains("features")) {
    const json& s = j["features"];
    require_keys(s, "features", {"bands", "m", "k", "shrinkage"});
    if (s.contains("bands")) {
      if (!s["bands"].is_array() || s["bands"].empty()) throw ParseError("features.bands must be a non-empty array");
      c.bands.clear();
      for (const auto& b : s["bands"]) c.bands.push_back(band_from(b));
    }
    read(s, "m", c.m);
    read(s, "k", c.k);
    read(s, "shrinkage", c.shrinkage);
  }
  if (j.contains("classify")) {
    const json& s = j["classify"];
    require_keys(s, "classify", {"c_reg", "max_iter", "tol"});
    read(s, "c_reg", c.svm.c_reg);
    read(s, "max_iter", c.svm.max_iter);
    read(s, "tol", c.svm.tol);
  }
  if (j.contains("eval")) {
    const json& s = j["eval"];
    require_keys(s, "eval", {"repeats", "folds", "seed", "methods", "paradigms", "threads"});
    read(s, "repeats", c.repeats);
    read(s, "folds", c.folds);
    read(s, "seed", c.seed);
    read(s, "threads", c.threads);
    if (s.contains("methods")) {
      std::vector<std::string> names;
      read(s, "methods", names);
      c.methods.clear();
      for (const auto& n : names) c.methods.push_back(parse_method(n));
    }
    if (s.contains("paradigms")) {
      std::vector<std::string> names;
      read(s, "paradigms", names);
      c.paradigms.clear();
      for (const auto& n : names) c.paradigms.push_back(parse_paradigm(n));
    }
  }
  if (j.contains("synth") && !j["synth"].is_null()) c.synth = synth_from_json(j["synth"]);

  if (!(c.ratio >= 0.0 && c.ratio <= 1.0)) throw ParseError("augment.ratio must lie in [0, 1]");
  if (c.multiplier < 0) throw ParseError("augment.multiplier must be >= 0");
  if (c.repeats < 1 || c.folds < 2) throw ParseError("eval needs repeats >= 1 and folds >= 2");
  if (c.threads < 1) throw ParseError("eval.threads must be >= 1");
  if (c.m < 1) throw ParseError("features.m must be >= 1");
  if (c.k < 0) throw ParseError("features.k must be >= 0");
  if (c.methods.empty()) throw ParseError("eval.methods is empty");
  if (c.paradigms.empty()) throw ParseError("eval.paradigms is empty");
  return c;
}

json config_to_json(const RunConfig& c) {
  json bands = json::array();
  for (const auto& b : c.bands) bands.push_back(band_to(b));
  std::vector<std::string> methods, paradigms;
  for (Method m : c.methods) methods.emplace_back(to_string(m));
  for (Paradigm p : c.paradigms) paradigms.emplace_back(to_string(p));
  json j = {
      {"io",
       {{"eeg", c.io.eeg},
        {"emg", c.io.emg},
        {"events", c.io.events},
        {"out", c.io.out},
        {"export_augmented", c.io.export_augmented}}},
      {"preprocess",
       {{"eeg_band", band_to(c.eeg_band)},
        {"filter_order", c.filter_order},
        {"channels", c.preprocess.channels},
        {"emg_notch_hz", c.preprocess.emg_notch_hz},
        {"emg_notch_q", c.preprocess.emg_notch_q},
        {"emg_band", band_to(c.preprocess.emg_band)},
        {"emg_filter_order", c.preprocess.emg_filter_order},
        {"reference_channel", c.preprocess.reference_index},
        {"median_kernel", c.preprocess.median_kernel},
        {"median_before_segmentation", c.preprocess.median_before_segmentation}}},
      {"segment", {{"window_ms", c.window_ms}, {"step_ms", c.step_ms}, {"trial_s", c.preprocess.trial_s}}},
      {"augment",
       {{"ratio", c.ratio},
        {"multiplier", c.multiplier},
        {"include_originals", c.include_originals},
        {"normalize_labels", c.normalize_labels}}},
      {"features", {{"bands", bands}, {"m", c.m}, {"k", c.k}, {"shrinkage", c.shrinkage}}},
      {"classify", {{"c_reg", c.svm.c_reg}, {"max_iter", c.svm.max_iter}, {"tol", c.svm.tol}}},
      {"eval",
       {{"repeats", c.repeats},
        {"folds", c.folds},
        {"seed", c.seed},
        {"methods", methods},
        {"paradigms", paradigms},
        {"threads", c.threads}}},
  };
  j["synth"] = c.synth ? synth_to_json(*c.synth) : json(nullptr);
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

SegmentGeometry RunConfig::geometry(int sample_rate_hz) const {
  return SegmentGeometry::from_ms(window_ms, step_ms, sample_rate_hz);
}

PipelineParams RunConfig::pipeline(int sample_rate_hz) const {
  PipelineParams p;
  p.csp_band = eeg_band;
  p.bands = bands;
  p.filter_order = filter_order;
  p.csp = {m, shrinkage};
  p.select_k = k;
  p.svm = svm;
  p.geometry = geometry(sample_rate_hz);
  p.augment = {ratio, preprocess.median_kernel};
  p.multiplier = multiplier;
  p.include_originals = include_originals;
  p.normalize_labels = normalize_labels;
  return p;
}

CvConfig RunConfig::cv(int sample_rate_hz) const {
  CvConfig c;
  c.n_repeats = repeats;
  c.n_folds = folds;
  c.methods = methods;
  c.seed = seed;
  c.threads = threads;
  c.pipeline = pipeline(sample_rate_hz);
  return c;
}

}  // namespace graspda
