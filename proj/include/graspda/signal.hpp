#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graspda {

// Channel-major sample matrix: rows are channels, columns are samples.
using Matrix = Eigen::MatrixXd;

enum class Modality : std::uint8_t { EEG = 0, EMG = 1 };
enum class Paradigm : std::uint8_t { ME = 0, MI = 1 };

std::string_view to_string(Modality m);
std::string_view to_string(Paradigm p);
Paradigm parse_paradigm(std::string_view s);

// Grasp class names for labels 1..5.
std::string_view class_name(int class_label);

struct Recording {
  Modality modality = Modality::EEG;
  int sample_rate_hz = 1000;
  std::vector<std::string> channel_names;
  Matrix samples;

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index length() const { return samples.cols(); }

  // Throws InvalidParameter when an invariant does not hold.
  void validate() const;
};

struct TrialEvent {
  std::uint32_t trial_id = 0;
  int class_label = 1;
  std::int64_t onset_sample = 0;
  Paradigm paradigm = Paradigm::ME;
};

// Trial data is immutable once extracted and shared between segments and
// the segment bank.
struct Trial {
  std::uint32_t trial_id = 0;
  int class_label = 1;
  Paradigm paradigm = Paradigm::ME;
  int sample_rate_hz = 1000;
  std::shared_ptr<const Matrix> samples;

  const Matrix& data() const { return *samples; }
  Eigen::Index channels() const { return samples->rows(); }
  Eigen::Index length() const { return samples->cols(); }

  static Trial make(std::uint32_t id, int class_label, Paradigm paradigm, int rate, Matrix data);
};

// A window into a trial. Holds a reference to the trial's storage.
struct Segment {
  std::uint32_t source_trial_id = 0;
  int class_label = 1;
  int segment_index = 0;
  std::shared_ptr<const Matrix> source;
  Eigen::Index offset = 0;
  Eigen::Index width = 0;

  auto data() const { return source->middleCols(offset, width); }
};

// Window/step in samples.
struct SegmentGeometry {
  Eigen::Index window = 500;
  Eigen::Index step = 250;

  static SegmentGeometry from_ms(double window_ms, double step_ms, int sample_rate_hz);
  // floor((length - window) / step) + 1, or 0 when the window does not fit.
  Eigen::Index count(Eigen::Index length) const;
  Eigen::Index begin(Eigen::Index i) const { return i * step; }
};

// Zero-phase Butterworth band-pass. `order` is the band-pass order (even);
// each band edge gets order/2 poles. A high edge exactly at Nyquist drops the
// upper edge and yields an order/2 high-pass.
Recording bandpass(const Recording& rec, double low_hz, double high_hz, int order);
Matrix bandpass(const Matrix& data, int sample_rate_hz, double low_hz, double high_hz, int order);

Recording notch(const Recording& rec, double center_hz, double q);
Matrix notch(const Matrix& data, int sample_rate_hz, double center_hz, double q);

// Copies [onset, onset + duration * rate) for each event.
std::vector<Trial> extract_trials(const Recording& rec, std::span<const TrialEvent> events,
                                  double duration_s);

std::vector<Segment> segment_trial(const Trial& t, double window_ms, double step_ms);
std::vector<Segment> segment_trial(const Trial& t, const SegmentGeometry& g);

// Per-channel sliding median with edge replication.
Matrix median_smooth(const Matrix& signal, int kernel_len);

// Median-smooths only columns [first, last) of `signal` in place; the window
// still reads neighbours outside the range.
void median_smooth_range(Matrix& signal, int kernel_len, Eigen::Index first, Eigen::Index last);

// Keeps only the named channels, in the order given. Empty list keeps all.
Recording select_channels(const Recording& rec, std::span<const std::string> names);

}  // namespace graspda
