#pragma once

#include "graspda/eval.hpp"
#include "graspda/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace graspda {

struct IoConfig {
  std::string eeg;
  std::string emg;
  std::string events;
  std::string out = "out";
  bool export_augmented = false;
};

struct RunConfig {
  IoConfig io;

  // preprocess
  PreprocessParams preprocess;
  Band eeg_band{8.0, 30.0};
  int filter_order = 4;

  // segment
  double window_ms = 500.0;
  double step_ms = 250.0;

  // augment
  double ratio = 0.6;
  int multiplier = 3;
  bool include_originals = true;
  bool normalize_labels = false;

  // features
  std::vector<Band> bands = default_filter_bank();
  int m = 3;
  int k = 12;
  double shrinkage = 0.05;

  // classify
  SvmParams svm;

  // eval
  int repeats = 5;
  int folds = 5;
  std::uint64_t seed = 1;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<Paradigm> paradigms{Paradigm::ME, Paradigm::MI};
  int threads = 1;

  std::optional<SynthConfig> synth;

  SegmentGeometry geometry(int sample_rate_hz) const;
  PipelineParams pipeline(int sample_rate_hz) const;
  CvConfig cv(int sample_rate_hz) const;
};

// Unknown keys anywhere in the document are rejected with ParseError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

SynthConfig synth_from_json(const nlohmann::json& j);
nlohmann::json synth_to_json(const SynthConfig& cfg);

}  // namespace graspda
