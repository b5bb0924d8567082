#include "graspda/augment.hpp"

#include "graspda/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace graspda {

std::span<const EmgLabel> SegmentBank::trial_labels(std::uint32_t trial_id) const {
  const auto it = first_entry_.find(trial_id);
  if (it == first_entry_.end()) throw InvalidParameter("trial " + std::to_string(trial_id) + " is not in the bank");
  return std::span<const EmgLabel>(labels).subspan(it->second, per_trial_);
}

SegmentBank build_bank(std::span<const Trial> eeg_trials, std::span<const EmgLabel> labels,
                       const SegmentGeometry& geometry) {
  std::map<std::pair<std::uint32_t, int>, const EmgLabel*> by_key;
  for (const auto& l : labels) by_key[{l.source_trial_id, l.segment_index}] = &l;

  SegmentBank bank;
  bank.geometry = geometry;
  for (const auto& trial : eeg_trials) {
    if (!bank.training_trial_ids.insert(trial.trial_id).second) {
      throw InvalidParameter("trial " + std::to_string(trial.trial_id) + " given twice");
    }
    auto segments = segment_trial(trial, geometry);
    if (bank.per_trial_ == 0) bank.per_trial_ = segments.size();
    if (segments.size() != bank.per_trial_) throw InvalidParameter("trials differ in segment count");
    bank.first_entry_[trial.trial_id] = bank.entries.size();
    for (auto& seg : segments) {
      const auto it = by_key.find({seg.source_trial_id, seg.segment_index});
      if (it == by_key.end()) {
        throw IncompleteLabels("missing label for trial " + std::to_string(seg.source_trial_id) + ", segment " +
                               std::to_string(seg.segment_index));
      }
      EmgLabel label = *it->second;
      label.class_label = seg.class_label;
      bank.labels.push_back(label);
      bank.entries.push_back({std::move(seg), std::move(label)});
    }
  }
  return bank;
}

std::vector<int> select_switch_positions(int n_segments, double ratio, Rng& rng) {
  if (n_segments < 0) throw InvalidParameter("segment count must be non-negative");
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidParameter("switch ratio must lie in [0, 1]");
  const int k = static_cast<int>(std::lround(ratio * n_segments));
  std::vector<int> idx(n_segments);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n_segments - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

AugmentedTrial augment_trial(const Trial& trial, std::span<const EmgLabel> trial_labels, const SegmentBank& bank,
                             const AugmentParams& params, Rng& rng) {
  const SegmentGeometry& g = bank.geometry;
  const auto n_seg = static_cast<int>(g.count(trial.length()));
  if (n_seg < 1) throw InvalidParameter("trial shorter than one window");
  if (static_cast<int>(trial_labels.size()) != n_seg) {
    throw IncompleteLabels("trial " + std::to_string(trial.trial_id) + " has " + std::to_string(trial_labels.size()) +
                           " labels for " + std::to_string(n_seg) + " segments");
  }
  if (bank.entries.empty()) throw NoCandidate("segment bank is empty");

  AugmentedTrial out;
  out.base_trial_id = trial.trial_id;
  out.class_label = trial.class_label;
  out.paradigm = trial.paradigm;
  out.provenance.resize(n_seg);
  for (int i = 0; i < n_seg; ++i) out.provenance[i] = {i, trial.trial_id, i, false};

  const auto positions = select_switch_positions(n_seg, params.ratio, rng);
  const auto not_own = [&](const EmgLabel& l) { return l.source_trial_id == trial.trial_id; };
  std::vector<const BankEntry*> replacement(n_seg, nullptr);
  for (int pos : positions) {
    const std::size_t hit = nearest_label(trial_labels[pos], bank.labels, not_own);
    const BankEntry& e = bank.entries[hit];
    replacement[pos] = &e;
    out.provenance[pos] = {pos, e.eeg_segment.source_trial_id, e.eeg_segment.segment_index, true};
  }
  if (positions.empty()) {
    out.data = trial.data();
    return out;
  }

  const Matrix& src = trial.data();
  Matrix acc = Matrix::Zero(src.rows(), src.cols());
  Eigen::VectorXd count = Eigen::VectorXd::Zero(src.cols());
  for (int i = 0; i < n_seg; ++i) {
    const Eigen::Index b = g.begin(i);
    if (replacement[i]) {
      const auto& seg = replacement[i]->eeg_segment;
      if (seg.source->rows() != src.rows()) throw InvalidParameter("bank segment channel count differs from trial");
      acc.middleCols(b, g.window) += seg.data();
    } else {
      acc.middleCols(b, g.window) += src.middleCols(b, g.window);
    }
    count.segment(b, g.window).array() += 1.0;
  }
  out.data.resize(src.rows(), src.cols());
  for (Eigen::Index c = 0; c < src.cols(); ++c) {
    out.data.col(c) = count(c) > 0 ? Eigen::VectorXd(acc.col(c) / count(c)) : Eigen::VectorXd(src.col(c));
  }

  // Seams sit where a switched window starts and ends.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
  const Eigen::Index k = params.kernel_len;
  for (int pos : positions) {
    for (Eigen::Index b : {g.begin(pos), g.begin(pos) + g.window}) {
      if (b <= 0 || b >= src.cols()) continue;
      ranges.emplace_back(std::max<Eigen::Index>(b - k, 0), std::min(b + k, src.cols()));
    }
  }
  std::sort(ranges.begin(), ranges.end());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> merged;
  for (const auto& r : ranges) {
    if (!merged.empty() && r.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, r.second);
    } else {
      merged.push_back(r);
    }
  }
  for (const auto& [first, last] : merged) median_smooth_range(out.data, params.kernel_len, first, last);
  return out;
}

std::vector<AugmentedTrial> augment_dataset(std::span<const Trial> training_trials, const SegmentBank& bank,
                                            int multiplier, const AugmentParams& params, std::uint64_t seed) {
  std::vector<AugmentedTrial> out;
  out.reserve(training_trials.size() * static_cast<std::size_t>(std::max(multiplier, 0)));
  for_each_augmented(training_trials, bank, multiplier, params, seed,
                     [&](AugmentedTrial&& a) { out.push_back(std::move(a)); });
  return out;
}

void audit_bank(const SegmentBank& bank, const std::set<std::uint32_t>& test_ids) {
  for (std::uint32_t id : bank.training_trial_ids) {
    if (test_ids.contains(id)) throw IsolationViolation("test trial " + std::to_string(id) + " is in the bank");
  }
  for (const auto& e : bank.entries) {
    const auto id = e.eeg_segment.source_trial_id;
    if (test_ids.contains(id) || !bank.training_trial_ids.contains(id)) {
      throw IsolationViolation("bank entry sourced from non-training trial " + std::to_string(id));
    }
  }
}

void audit_augmented(std::span<const AugmentedTrial> augmented, const std::set<std::uint32_t>& training_ids,
                     const std::set<std::uint32_t>& test_ids) {
  for (const auto& a : augmented) {
    for (const auto& p : a.provenance) {
      if (test_ids.contains(p.source_trial_id) || !training_ids.contains(p.source_trial_id)) {
        throw IsolationViolation("augmented trial " + std::to_string(a.aug_id) + " uses segment from trial " +
                                 std::to_string(p.source_trial_id) + " outside the training split");
      }
    }
  }
}

void write_provenance_csv(std::ostream& out, std::span<const AugmentedTrial> augmented) {
  out << "aug_id,base_trial_id,position,source_trial_id,source_segment_index,switched\n";
  for (const auto& a : augmented) {
    for (const auto& p : a.provenance) {
      out << a.aug_id << ',' << a.base_trial_id << ',' << p.segment_index << ',' << p.source_trial_id << ','
          << p.source_segment_index << ',' << (p.switched ? 1 : 0) << '\n';
    }
  }
}

}  // namespace graspda
