#pragma once

#include "graspda/eval.hpp"
#include "graspda/synth.hpp"

namespace graspda::test {

inline SynthConfig small_synth(int trials_per_class, double snr_db, std::uint64_t seed, bool noise_free = false) {
  SynthConfig cfg;
  cfg.trials_per_class = trials_per_class;
  cfg.snr_db = snr_db;
  cfg.seed = seed;
  cfg.noise_free = noise_free;
  return cfg;
}

// ME dataset with EMG-derived segment labels, straight from the generator.
inline PreparedData prepared_session(const SynthConfig& cfg) {
  const SynthSession s = generate_session(cfg);
  return prepare(s.eeg, &s.emg, s.events, PreprocessParams{}, SegmentGeometry{});
}

}  // namespace graspda::test
