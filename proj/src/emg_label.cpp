#include "graspda/emg_label.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace graspda {

Eigen::VectorXd rms(const Eigen::Ref<const Matrix>& segment) {
  if (segment.cols() < 1 || segment.rows() < 1) throw InvalidParameter("rms of an empty segment");
  return (segment.array().square().rowwise().sum() / static_cast<double>(segment.cols())).sqrt().matrix();
}

EmgLabel build_label(const Segment& emg_segment, int reference_index) {
  const Eigen::Index channels = emg_segment.source->rows();
  if (reference_index < 0 || reference_index >= channels) {
    throw InvalidParameter("reference channel index " + std::to_string(reference_index) + " out of range");
  }
  const Eigen::VectorXd all = rms(emg_segment.data());
  const double ref = all(reference_index);
  EmgLabel label;
  label.rms.resize(channels - 1);
  for (Eigen::Index c = 0, k = 0; c < channels; ++c) {
    if (c == reference_index) continue;
    label.rms(k++) = std::max(0.0, all(c) - ref);
  }
  label.source_trial_id = emg_segment.source_trial_id;
  label.class_label = emg_segment.class_label;
  label.segment_index = emg_segment.segment_index;
  return label;
}

std::vector<EmgLabel> label_trial(const Trial& emg_trial, const SegmentGeometry& geometry, int reference_index) {
  std::vector<EmgLabel> out;
  for (const auto& seg : segment_trial(emg_trial, geometry)) out.push_back(build_label(seg, reference_index));
  return out;
}

double mse(const EmgLabel& a, const EmgLabel& b) {
  if (a.rms.size() != b.rms.size()) throw InvalidParameter("label length mismatch");
  if (a.rms.size() == 0) return 0.0;
  return (a.rms - b.rms).squaredNorm() / static_cast<double>(a.rms.size());
}

std::vector<LabelTemplate> build_templates(std::span<const EmgLabel> me_labels, int n_segments) {
  struct Acc {
    Eigen::VectorXd sum;
    int count = 0;
  };
  std::map<int, std::vector<Acc>> cells;
  for (const auto& l : me_labels) {
    if (l.segment_index < 0 || l.segment_index >= n_segments) continue;
    auto& row = cells[l.class_label];
    row.resize(n_segments);
    Acc& a = row[l.segment_index];
    if (a.count == 0) {
      a.sum = l.rms;
    } else {
      if (a.sum.size() != l.rms.size()) throw InvalidParameter("label length mismatch");
      a.sum += l.rms;
    }
    ++a.count;
  }
  std::vector<LabelTemplate> out;
  for (auto& [cls, row] : cells) {
    LabelTemplate t;
    t.class_label = cls;
    for (int s = 0; s < n_segments; ++s) {
      if (row[s].count == 0) {
        throw IncompleteTemplate("no ME label for class " + std::to_string(cls) + ", segment " + std::to_string(s));
      }
      t.per_segment.push_back(row[s].sum / row[s].count);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<EmgLabel> assign_mi_labels(const Trial& mi_trial, std::span<const LabelTemplate> templates) {
  for (const auto& t : templates) {
    if (t.class_label != mi_trial.class_label) continue;
    std::vector<EmgLabel> out;
    for (std::size_t s = 0; s < t.per_segment.size(); ++s) {
      EmgLabel l;
      l.rms = t.per_segment[s];
      l.source_trial_id = mi_trial.trial_id;
      l.class_label = mi_trial.class_label;
      l.segment_index = static_cast<int>(s);
      out.push_back(std::move(l));
    }
    return out;
  }
  throw MissingTemplate("no label template for class " + std::to_string(mi_trial.class_label));
}

Eigen::VectorXd label_scale(std::span<const EmgLabel> labels) {
  if (labels.empty()) throw InvalidParameter("cannot compute label scale of an empty set");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(labels.front().rms.size());
  for (const auto& l : labels) sum += l.rms;
  sum /= static_cast<double>(labels.size());
  return sum.cwiseMax(1e-12);
}

void normalize_labels(std::vector<EmgLabel>& labels, const Eigen::VectorXd& scale) {
  for (auto& l : labels) l.rms = l.rms.cwiseQuotient(scale);
}

void write_label_csv(std::ostream& out, std::span<const EmgLabel> labels) {
  const Eigen::Index dims = labels.empty() ? 4 : labels.front().rms.size();
  out << "source_trial_id,class_label,segment_index";
  for (Eigen::Index i = 0; i < dims; ++i) out << ",rms" << (i + 1);
  out << '\n';
  char buf[32];
  for (const auto& l : labels) {
    out << l.source_trial_id << ',' << l.class_label << ',' << l.segment_index;
    for (Eigen::Index i = 0; i < l.rms.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.9g", l.rms(i));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace graspda
