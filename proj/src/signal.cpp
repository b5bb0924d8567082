#include "graspda/signal.hpp"

#include "graspda/error.hpp"
#include "graspda/filter.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace graspda {

std::string_view to_string(Modality m) { return m == Modality::EEG ? "EEG" : "EMG"; }

std::string_view to_string(Paradigm p) { return p == Paradigm::ME ? "ME" : "MI"; }

Paradigm parse_paradigm(std::string_view s) {
  if (s == "ME") return Paradigm::ME;
  if (s == "MI") return Paradigm::MI;
  throw ParseError("unknown paradigm '" + std::string(s) + "' (expected ME or MI)");
}

std::string_view class_name(int class_label) {
  static constexpr std::string_view names[] = {"Cyl", "Sph", "Pin", "Tri", "Lum"};
  if (class_label >= 1 && class_label <= 5) return names[class_label - 1];
  return "?";
}

void Recording::validate() const {
  if (sample_rate_hz <= 0) throw InvalidParameter("sample rate must be positive");
  if (static_cast<Eigen::Index>(channel_names.size()) != samples.rows()) {
    throw InvalidParameter("channel name count does not match sample matrix rows");
  }
  if (!samples.allFinite()) throw InvalidParameter("recording contains non-finite samples");
}

Trial Trial::make(std::uint32_t id, int class_label, Paradigm paradigm, int rate, Matrix data) {
  Trial t;
  t.trial_id = id;
  t.class_label = class_label;
  t.paradigm = paradigm;
  t.sample_rate_hz = rate;
  t.samples = std::make_shared<const Matrix>(std::move(data));
  return t;
}

SegmentGeometry SegmentGeometry::from_ms(double window_ms, double step_ms, int sample_rate_hz) {
  if (!(window_ms > 0.0)) throw InvalidParameter("window length must be positive");
  if (!(step_ms > 0.0)) throw InvalidParameter("step must be positive");
  SegmentGeometry g;
  g.window = std::llround(window_ms * sample_rate_hz / 1000.0);
  g.step = std::llround(step_ms * sample_rate_hz / 1000.0);
  if (g.window < 1 || g.step < 1) throw InvalidParameter("window and step must span at least one sample");
  return g;
}

Eigen::Index SegmentGeometry::count(Eigen::Index length) const {
  if (length < window) return 0;
  return (length - window) / step + 1;
}

Matrix bandpass(const Matrix& data, int sample_rate_hz, double low_hz, double high_hz, int order) {
  return filtfilt(butterworth_bandpass(low_hz, high_hz, sample_rate_hz, order), data);
}

Recording bandpass(const Recording& rec, double low_hz, double high_hz, int order) {
  Recording out = rec;
  out.samples = bandpass(rec.samples, rec.sample_rate_hz, low_hz, high_hz, order);
  return out;
}

Matrix notch(const Matrix& data, int sample_rate_hz, double center_hz, double q) {
  return filtfilt(iir_notch(center_hz, q, sample_rate_hz), data);
}

Recording notch(const Recording& rec, double center_hz, double q) {
  Recording out = rec;
  out.samples = notch(rec.samples, rec.sample_rate_hz, center_hz, q);
  return out;
}

std::vector<Trial> extract_trials(const Recording& rec, std::span<const TrialEvent> events, double duration_s) {
  const Eigen::Index len = std::llround(duration_s * rec.sample_rate_hz);
  if (len <= 0) throw InvalidParameter("trial duration must be positive");
  std::unordered_set<std::uint32_t> seen;
  std::vector<Trial> trials;
  trials.reserve(events.size());
  for (const auto& ev : events) {
    if (!seen.insert(ev.trial_id).second) {
      throw InvalidParameter("duplicate trial_id " + std::to_string(ev.trial_id));
    }
    if (ev.onset_sample < 0 || ev.onset_sample + len > rec.length()) {
      throw OutOfRange("trial " + std::to_string(ev.trial_id) + " window [" + std::to_string(ev.onset_sample) +
                       ", " + std::to_string(ev.onset_sample + len) + ") exceeds recording length " +
                       std::to_string(rec.length()));
    }
    trials.push_back(Trial::make(ev.trial_id, ev.class_label, ev.paradigm, rec.sample_rate_hz,
                                 rec.samples.middleCols(ev.onset_sample, len)));
  }
  return trials;
}

std::vector<Segment> segment_trial(const Trial& t, const SegmentGeometry& g) {
  if (g.step <= 0) throw InvalidParameter("step must be positive");
  if (g.window > t.length()) throw InvalidParameter("window is longer than the trial");
  const Eigen::Index n = g.count(t.length());
  std::vector<Segment> out;
  out.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Segment s;
    s.source_trial_id = t.trial_id;
    s.class_label = t.class_label;
    s.segment_index = static_cast<int>(i);
    s.source = t.samples;
    s.offset = g.begin(i);
    s.width = g.window;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Segment> segment_trial(const Trial& t, double window_ms, double step_ms) {
  return segment_trial(t, SegmentGeometry::from_ms(window_ms, step_ms, t.sample_rate_hz));
}

namespace {

void check_kernel(int kernel_len, Eigen::Index length) {
  if (kernel_len < 1 || kernel_len % 2 == 0) throw InvalidParameter("median kernel length must be odd and >= 1");
  if (kernel_len > length) throw InvalidParameter("median kernel longer than the signal");
}

}  // namespace

void median_smooth_range(Matrix& signal, int kernel_len, Eigen::Index first, Eigen::Index last) {
  const Eigen::Index n = signal.cols();
  check_kernel(kernel_len, n);
  first = std::max<Eigen::Index>(first, 0);
  last = std::min(last, n);
  if (kernel_len == 1 || first >= last) return;
  const Eigen::Index half = kernel_len / 2;
  // Read from a snapshot so already-smoothed columns do not feed later ones.
  const Eigen::Index lo = std::max<Eigen::Index>(first - half, 0);
  const Eigen::Index hi = std::min(last + half, n);
  const Matrix src = signal.middleCols(lo, hi - lo);
  std::vector<double> window(kernel_len);
  for (Eigen::Index r = 0; r < signal.rows(); ++r) {
    for (Eigen::Index c = first; c < last; ++c) {
      for (Eigen::Index k = -half; k <= half; ++k) {
        const Eigen::Index idx = std::clamp<Eigen::Index>(c + k, 0, n - 1);
        window[k + half] = src(r, idx - lo);
      }
      std::nth_element(window.begin(), window.begin() + half, window.end());
      signal(r, c) = window[half];
    }
  }
}

Matrix median_smooth(const Matrix& signal, int kernel_len) {
  check_kernel(kernel_len, signal.cols());
  Matrix out = signal;
  median_smooth_range(out, kernel_len, 0, signal.cols());
  return out;
}

Recording select_channels(const Recording& rec, std::span<const std::string> names) {
  if (names.empty()) return rec;
  Recording out;
  out.modality = rec.modality;
  out.sample_rate_hz = rec.sample_rate_hz;
  out.samples.resize(static_cast<Eigen::Index>(names.size()), rec.length());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto it = std::find(rec.channel_names.begin(), rec.channel_names.end(), names[i]);
    if (it == rec.channel_names.end()) throw InvalidParameter("unknown channel '" + names[i] + "'");
    out.samples.row(static_cast<Eigen::Index>(i)) = rec.samples.row(it - rec.channel_names.begin());
    out.channel_names.push_back(names[i]);
  }
  return out;
}

}  // namespace graspda
