#pragma once

#include "graspda/features.hpp"
#include "graspda/signal.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace graspda {

struct SynthConfig {
  int n_classes = 5;
  int trials_per_class = 50;
  int eeg_channels = 20;
  int emg_channels = 5;  // last channel is the reference electrode
  int sample_rate_hz = 1000;
  double trial_s = 4.0;
  double gap_s = 1.0;
  double snr_db = 0.0;
  bool noise_free = false;
  int sources_per_class = 2;
  // Class patterns are a shared motor pattern plus this much of a
  // class-specific random direction; small values make classes overlap.
  double pattern_spread = 0.05;
  // Fraction of EEG noise power carried by class-independent 8-12 Hz
  // background sources; the rest is spatially mixed 1/f noise.
  double background_fraction = 0.5;
  // Fraction of EEG noise power carried by transient artifacts: short
  // broadband bursts, each with its own random scalp direction.
  double artifact_fraction = 0.3;
  int artifacts_per_trial = 4;
  double emg_noise = 0.02;
  double line_noise_amp = 0.0;  // 60 Hz on EMG channels
  bool include_mi = false;      // append an MI block after the ME block
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthTruth {
  std::uint64_t seed = 0;
  // Per class, channels x sources, unit-norm columns.
  std::vector<Matrix> patterns;
  // Per class, active muscles x segments, non-negative.
  std::vector<Matrix> envelopes;
  std::vector<double> source_gains;
};

struct SynthSession {
  Recording eeg;
  Recording emg;
  std::vector<TrialEvent> events;
  SynthTruth truth;
};

SynthSession generate_session(const SynthConfig& cfg);

// Absolute cosine between the top filter's pattern and the closest planted
// column of the filter set's target class.
double plant_check(const SpatialFilterSet& fs, const SynthTruth& truth);

void write_truth_json(std::ostream& out, const SynthTruth& truth, const SynthConfig& cfg);

// Standard 10/20 motor-strip names used for synthetic EEG (20 channels).
std::vector<std::string> motor_channel_names(int n);

}  // namespace graspda
