#pragma once

#include "graspda/emg_label.hpp"
#include "graspda/rng.hpp"
#include "graspda/signal.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <vector>

namespace graspda {

struct BankEntry {
  Segment eeg_segment;
  EmgLabel label;
};

// Labeled EEG segments harvested from training trials only.
struct SegmentBank {
  std::vector<BankEntry> entries;
  std::vector<EmgLabel> labels;  // parallel to entries, the nearest_label pool
  std::set<std::uint32_t> training_trial_ids;
  SegmentGeometry geometry;

  // Labels of one training trial, in segment order.
  std::span<const EmgLabel> trial_labels(std::uint32_t trial_id) const;

 private:
  friend SegmentBank build_bank(std::span<const Trial>, std::span<const EmgLabel>, const SegmentGeometry&);
  std::map<std::uint32_t, std::size_t> first_entry_;
  std::size_t per_trial_ = 0;
};

SegmentBank build_bank(std::span<const Trial> eeg_trials, std::span<const EmgLabel> labels,
                       const SegmentGeometry& geometry = {});

struct SwitchRecord {
  int segment_index = 0;
  std::uint32_t source_trial_id = 0;
  int source_segment_index = 0;
  bool switched = false;
};

struct AugmentedTrial {
  std::uint32_t aug_id = 0;
  std::uint32_t base_trial_id = 0;
  int variant = 0;
  int class_label = 1;
  Paradigm paradigm = Paradigm::ME;
  Matrix data;
  std::vector<SwitchRecord> provenance;
};

struct AugmentParams {
  double ratio = 0.6;
  int kernel_len = 11;
};

// round(ratio * n_segments) distinct positions, ascending.
std::vector<int> select_switch_positions(int n_segments, double ratio, Rng& rng);

// Replaces the selected windows with the bank segment whose label is closest
// to the trial's own label at that position (excluding the trial's own
// segments), reassembles overlapping windows by averaging, then median-smooths
// the seams around every switched window.
AugmentedTrial augment_trial(const Trial& trial, std::span<const EmgLabel> trial_labels, const SegmentBank& bank,
                             const AugmentParams& params, Rng& rng);

// `multiplier` variants per training trial; variant v of trial t draws from
// the substream (seed, t, v). The callback form hands each trial over as it
// is produced instead of holding the whole set in memory.
template <typename Sink>
void for_each_augmented(std::span<const Trial> training_trials, const SegmentBank& bank, int multiplier,
                        const AugmentParams& params, std::uint64_t seed, Sink&& sink) {
  if (multiplier < 0) throw InvalidParameter("augmentation multiplier must be non-negative");
  std::uint32_t next_id = 0;
  for (const auto& trial : training_trials) {
    const auto labels = bank.trial_labels(trial.trial_id);
    for (int v = 0; v < multiplier; ++v) {
      Rng rng = make_rng(seed, {trial.trial_id, static_cast<std::uint64_t>(v)});
      AugmentedTrial a = augment_trial(trial, labels, bank, params, rng);
      a.aug_id = next_id++;
      a.variant = v;
      sink(std::move(a));
    }
  }
}

std::vector<AugmentedTrial> augment_dataset(std::span<const Trial> training_trials, const SegmentBank& bank,
                                            int multiplier, const AugmentParams& params, std::uint64_t seed);

// Throws IsolationViolation if any bank entry or augmented segment was
// sourced from outside the training ids or from a test trial.
void audit_bank(const SegmentBank& bank, const std::set<std::uint32_t>& test_ids);
void audit_augmented(std::span<const AugmentedTrial> augmented, const std::set<std::uint32_t>& training_ids,
                     const std::set<std::uint32_t>& test_ids);

// CSV `aug_id,base_trial_id,position,source_trial_id,source_segment_index,switched`.
void write_provenance_csv(std::ostream& out, std::span<const AugmentedTrial> augmented);

}  // namespace graspda
