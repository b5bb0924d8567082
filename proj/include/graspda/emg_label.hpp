#pragma once

#include "graspda/error.hpp"
#include "graspda/signal.hpp"

#include <concepts>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <tuple>
#include <vector>

namespace graspda {

// Per-muscle activation for one segment: RMS of each active EMG channel with
// the reference channel's RMS subtracted and clamped at zero.
struct EmgLabel {
  Eigen::VectorXd rms;
  std::uint32_t source_trial_id = 0;
  int class_label = 1;
  int segment_index = 0;
};

// Mean label sequence for one class, one entry per segment index.
struct LabelTemplate {
  int class_label = 1;
  std::vector<Eigen::VectorXd> per_segment;
};

// Root mean square of each row.
Eigen::VectorXd rms(const Eigen::Ref<const Matrix>& segment);

EmgLabel build_label(const Segment& emg_segment, int reference_index);

// Labels for every segment of an EMG trial, in segment order.
std::vector<EmgLabel> label_trial(const Trial& emg_trial, const SegmentGeometry& geometry, int reference_index);

double mse(const EmgLabel& a, const EmgLabel& b);

// Index into `pool` of the non-excluded entry with the smallest mse to
// `query`. Ties go to the lower (source_trial_id, segment_index).
template <std::predicate<const EmgLabel&> Exclude>
std::size_t nearest_label(const EmgLabel& query, std::span<const EmgLabel> pool, Exclude&& exclude) {
  std::size_t best = pool.size();
  double best_err = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const EmgLabel& cand = pool[i];
    if (exclude(cand)) continue;
    const double err = mse(query, cand);
    if (best == pool.size() || err < best_err ||
        (err == best_err && std::tie(cand.source_trial_id, cand.segment_index) <
                                std::tie(pool[best].source_trial_id, pool[best].segment_index))) {
      best = i;
      best_err = err;
    }
  }
  if (best == pool.size()) throw NoCandidate("no candidate label left after exclusion");
  return best;
}

inline std::size_t nearest_label(const EmgLabel& query, std::span<const EmgLabel> pool) {
  return nearest_label(query, pool, [](const EmgLabel&) { return false; });
}

// Per class and segment index, the elementwise mean of the matching labels.
// Every (class, index) cell for index < n_segments must be populated.
std::vector<LabelTemplate> build_templates(std::span<const EmgLabel> me_labels, int n_segments = 15);

// The class template's label sequence, stamped with the MI trial's provenance.
std::vector<EmgLabel> assign_mi_labels(const Trial& mi_trial, std::span<const LabelTemplate> templates);

// Per-channel scale factors (mean activation over `labels`, floored) used
// when label normalization is enabled.
Eigen::VectorXd label_scale(std::span<const EmgLabel> labels);
void normalize_labels(std::vector<EmgLabel>& labels, const Eigen::VectorXd& scale);

// CSV with header `source_trial_id,class_label,segment_index,rms1,...,rmsN`.
void write_label_csv(std::ostream& out, std::span<const EmgLabel> labels);

}  // namespace graspda
