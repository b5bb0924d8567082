#include "graspda/synth.hpp"

#include "graspda/error.hpp"
#include "graspda/filter.hpp"
#include "graspda/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace graspda {
namespace {

constexpr int kSegments = 15;

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  return m;
}

Matrix unit_columns(Matrix m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c).normalize();
  return m;
}

// Paul Kellet's refined pink filter, -10 dB/decade, run along columns.
Matrix pink_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  constexpr Eigen::Index warmup = 2000;
  const Matrix white = gaussian(rows, cols + warmup, rng);
  Eigen::ArrayXd b0 = Eigen::ArrayXd::Zero(rows), b1 = b0, b2 = b0, b3 = b0, b4 = b0, b5 = b0, b6 = b0;
  Matrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols + warmup; ++c) {
    const Eigen::ArrayXd w = white.col(c).array();
    b0 = 0.99886 * b0 + w * 0.0555179;
    b1 = 0.99332 * b1 + w * 0.0750759;
    b2 = 0.96900 * b2 + w * 0.1538520;
    b3 = 0.86650 * b3 + w * 0.3104856;
    b4 = 0.55000 * b4 + w * 0.5329522;
    b5 = -0.7616 * b5 - w * 0.0168980;
    const Eigen::ArrayXd pink = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
    b6 = w * 0.115926;
    if (c >= warmup) out.col(c - warmup) = pink.matrix();
  }
  return out;
}

// Unit-RMS 8-12 Hz oscillations.
Matrix alpha_sources(Eigen::Index rows, Eigen::Index cols, int rate, Rng& rng) {
  Matrix s = filtfilt(butterworth_bandpass(8.0, 12.0, rate, 4), gaussian(rows, cols, rng));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double rms = std::sqrt(s.row(r).squaredNorm() / static_cast<double>(cols));
    if (rms > 0) s.row(r) /= rms;
  }
  return s;
}

// Hann-tapered 1-40 Hz bursts of 250-750 ms inside the trial window, each
// projected through its own random unit direction.
Matrix artifacts(Eigen::Index channels, Eigen::Index cols, Eigen::Index trial_start, Eigen::Index trial_len, int count,
                 int rate, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const SosFilter band = butterworth_bandpass(1.0, 40.0, rate, 4);
  Matrix out = Matrix::Zero(channels, cols);
  for (int a = 0; a < count; ++a) {
    const auto len = std::min<Eigen::Index>(trial_len, std::llround((0.25 + 0.5 * unit(rng)) * rate));
    const auto start = trial_start + static_cast<Eigen::Index>(unit(rng) * static_cast<double>(trial_len - len));
    const Eigen::VectorXd dir = gaussian(channels, 1, rng).col(0).normalized();
    Eigen::RowVectorXd wave = filtfilt(band, gaussian(1, len, rng)).row(0);
    for (Eigen::Index t = 0; t < len; ++t) {
      wave(t) *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(len - 1));
    }
    out.middleCols(start, len) += (0.5 + unit(rng)) * dir * wave;
  }
  return out;
}

// Piecewise-linear interpolation of per-segment values at segment centres.
Eigen::RowVectorXd envelope_curve(const Eigen::RowVectorXd& per_segment, Eigen::Index length) {
  const Eigen::Index n = per_segment.size();
  const double step = static_cast<double>(length) / (n + 1);
  Eigen::RowVectorXd out(length);
  for (Eigen::Index t = 0; t < length; ++t) {
    const double pos = static_cast<double>(t) / step - 1.0;  // centre of segment j sits at (j + 1) * step
    if (pos <= 0.0) {
      out(t) = per_segment(0);
    } else if (pos >= static_cast<double>(n - 1)) {
      out(t) = per_segment(n - 1);
    } else {
      const auto j = static_cast<Eigen::Index>(std::floor(pos));
      const double f = pos - static_cast<double>(j);
      out(t) = (1.0 - f) * per_segment(j) + f * per_segment(j + 1);
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> motor_channel_names(int n) {
  static const std::vector<std::string> names = {"FC1", "FC2", "FC3", "FC4", "FC5", "FC6", "C1",
                                                 "C2",  "C3",  "C4",  "C5",  "C6",  "Cz", "CP1",
                                                 "CP2", "CP3", "CP4", "CP5", "CP6", "CPz"};
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(i < static_cast<int>(names.size()) ? names[i] : "E" + std::to_string(i + 1));
  }
  return out;
}

void SynthConfig::validate() const {
  if (n_classes < 2) throw InvalidParameter("synth needs at least 2 classes");
  if (trials_per_class < 1) throw InvalidParameter("trials_per_class must be positive");
  if (eeg_channels < 2) throw InvalidParameter("synth needs at least 2 EEG channels");
  if (emg_channels < 2) throw InvalidParameter("synth needs at least one active EMG channel plus the reference");
  if (sample_rate_hz < 100) throw InvalidParameter("sample rate too low for 8-12 Hz sources");
  if (!(trial_s > 0.0) || !(gap_s >= 0.0)) throw InvalidParameter("trial and gap durations must be positive");
  if (!std::isfinite(snr_db)) throw InvalidParameter("snr_db must be finite");
  if (sources_per_class < 1 || sources_per_class > eeg_channels) throw InvalidParameter("bad sources_per_class");
  if (!(pattern_spread > 0.0) || !std::isfinite(pattern_spread)) {
    throw InvalidParameter("pattern_spread must be positive");
  }
  if (!(background_fraction >= 0.0 && background_fraction <= 1.0)) {
    throw InvalidParameter("background_fraction must lie in [0, 1]");
  }
  if (!(artifact_fraction >= 0.0 && artifact_fraction < 1.0)) {
    throw InvalidParameter("artifact_fraction must lie in [0, 1)");
  }
  if (artifacts_per_trial < 0) throw InvalidParameter("artifacts_per_trial must be non-negative");
  if (artifact_fraction > 0.0 && artifacts_per_trial == 0) {
    throw InvalidParameter("artifact_fraction needs at least one artifact per trial");
  }
  if (!(emg_noise >= 0.0) || !(line_noise_amp >= 0.0)) throw InvalidParameter("noise levels must be non-negative");
}

SynthSession generate_session(const SynthConfig& cfg) {
  cfg.validate();
  const int rate = cfg.sample_rate_hz;
  const auto trial_len = static_cast<Eigen::Index>(std::llround(cfg.trial_s * rate));
  const auto gap_len = static_cast<Eigen::Index>(std::llround(cfg.gap_s * rate));
  const Eigen::Index slot = trial_len + gap_len;
  const int n_active = cfg.emg_channels - 1;
  const int blocks = cfg.include_mi ? 2 : 1;
  const int per_block = cfg.n_classes * cfg.trials_per_class;
  const Eigen::Index total = slot * per_block * blocks;

  SynthSession s;
  s.truth.seed = cfg.seed;

  // Session-level structure.
  Rng structure = make_rng(cfg.seed, {0});
  const Matrix shared = unit_columns(gaussian(cfg.eeg_channels, cfg.sources_per_class, structure));
  for (int k = 0; k < cfg.n_classes; ++k) {
    const Matrix own = unit_columns(gaussian(cfg.eeg_channels, cfg.sources_per_class, structure));
    s.truth.patterns.push_back(unit_columns(shared + cfg.pattern_spread * own));
  }
  for (int i = 0; i < cfg.sources_per_class; ++i) s.truth.source_gains.push_back(1.0 / (1.0 + i));

  std::vector<double> levels(n_active);
  for (int m = 0; m < n_active; ++m) levels[m] = static_cast<double>(m + 1) / n_active;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < cfg.n_classes; ++k) {
    std::vector<double> perm = levels;
    std::shuffle(perm.begin(), perm.end(), structure);
    const int onset = 1 + static_cast<int>(unit(structure) * 3.0);  // first active segment in 1..3
    Eigen::RowVectorXd profile(kSegments);
    for (int j = 0; j < kSegments; ++j) {
      double g = 0.1;
      if (j >= onset) g = std::min(1.0, 0.1 + 0.45 * (j - onset + 1));
      if (j >= onset + 2) g = 0.75 + 0.25 * unit(structure);
      profile(j) = g;
    }
    Matrix env(n_active, kSegments);
    for (int m = 0; m < n_active; ++m) env.row(m) = perm[m] * profile;
    s.truth.envelopes.push_back(env);
  }
  const Matrix noise_mix = Matrix::Identity(cfg.eeg_channels, cfg.eeg_channels) +
                           0.5 * gaussian(cfg.eeg_channels, cfg.eeg_channels, structure) /
                               std::sqrt(static_cast<double>(cfg.eeg_channels));
  constexpr int kBackground = 4;
  const Matrix background_patterns = unit_columns(gaussian(cfg.eeg_channels, kBackground, structure));

  // Trial order: shuffled classes within each block.
  std::vector<int> order;
  for (int k = 1; k <= cfg.n_classes; ++k)
    for (int t = 0; t < cfg.trials_per_class; ++t) order.push_back(k);

  s.eeg.modality = Modality::EEG;
  s.eeg.sample_rate_hz = rate;
  s.eeg.channel_names = motor_channel_names(cfg.eeg_channels);
  s.eeg.samples = Matrix::Zero(cfg.eeg_channels, total);
  s.emg.modality = Modality::EMG;
  s.emg.sample_rate_hz = rate;
  for (int m = 1; m <= n_active; ++m) s.emg.channel_names.push_back("CH" + std::to_string(m));
  s.emg.channel_names.push_back("REF");
  s.emg.samples = Matrix::Zero(cfg.emg_channels, total);

  const double noise_to_signal = std::pow(10.0, -cfg.snr_db / 10.0);
  for (int block = 0; block < blocks; ++block) {
    const Paradigm paradigm = block == 0 ? Paradigm::ME : Paradigm::MI;
    std::vector<int> classes = order;
    Rng shuffler = make_rng(cfg.seed, {3, static_cast<std::uint64_t>(block)});
    std::shuffle(classes.begin(), classes.end(), shuffler);
    for (int i = 0; i < per_block; ++i) {
      const auto trial_id = static_cast<std::uint32_t>(block * per_block + i);
      const int k = classes[i];
      const Eigen::Index slot_start = slot * trial_id;
      const Eigen::Index onset = slot_start + gap_len / 2;
      s.events.push_back({trial_id, k, onset, paradigm});

      Rng sig_rng = make_rng(cfg.seed, {1, trial_id});
      Rng noise_rng = make_rng(cfg.seed, {2, trial_id});
      Rng emg_rng = make_rng(cfg.seed, {4, trial_id});
      std::normal_distribution<double> n01(0.0, 1.0);

      // Per-trial EMG envelope with jitter.
      const Matrix& base_env = s.truth.envelopes[k - 1];
      Matrix env(n_active, kSegments);
      for (int m = 0; m < n_active; ++m) {
        const double gain = std::clamp(1.0 + 0.15 * n01(sig_rng), 0.5, 1.5);
        for (int j = 0; j < kSegments; ++j) {
          env(m, j) = std::max(0.0, base_env(m, j) * gain * (1.0 + 0.05 * n01(sig_rng)));
        }
      }
      const double level_mean = std::accumulate(levels.begin(), levels.end(), 0.0) / n_active;
      const Eigen::RowVectorXd activation = env.colwise().mean() / level_mean;

      // EEG class signal.
      const double mi_gain = paradigm == Paradigm::MI ? 0.6 : 1.0;
      Matrix sources = alpha_sources(cfg.sources_per_class, trial_len, rate, sig_rng);
      const Eigen::RowVectorXd eeg_env = envelope_curve(activation, trial_len);
      for (int src = 0; src < cfg.sources_per_class; ++src) {
        sources.row(src) = sources.row(src).cwiseProduct(eeg_env) * (s.truth.source_gains[src] * mi_gain);
      }
      const Matrix signal = s.truth.patterns[k - 1] * sources;
      s.eeg.samples.middleCols(onset, trial_len) += signal;

      if (!cfg.noise_free) {
        const double signal_power = signal.squaredNorm() / static_cast<double>(signal.size());
        const Matrix pink = noise_mix * pink_noise(cfg.eeg_channels, slot, noise_rng);
        Matrix bg_src = alpha_sources(kBackground, slot, rate, noise_rng);
        for (int b = 0; b < kBackground; ++b) bg_src.row(b) *= 0.5 + unit(noise_rng);
        const Matrix background = background_patterns * bg_src;
        const auto in_trial = [&](const Matrix& m) {
          return m.middleCols(onset - slot_start, trial_len).squaredNorm() / static_cast<double>(signal.size());
        };
        const double stationary = 1.0 - cfg.artifact_fraction;
        Matrix noise = std::sqrt(stationary * (1.0 - cfg.background_fraction) / in_trial(pink)) * pink +
                       std::sqrt(stationary * cfg.background_fraction / in_trial(background)) * background;
        if (cfg.artifact_fraction > 0.0) {
          const Matrix bursts = artifacts(cfg.eeg_channels, slot, onset - slot_start, trial_len,
                                          cfg.artifacts_per_trial, rate, noise_rng);
          noise += std::sqrt(cfg.artifact_fraction / in_trial(bursts)) * bursts;
        }
        noise *= std::sqrt(signal_power * noise_to_signal / in_trial(noise));
        s.eeg.samples.middleCols(slot_start, slot) += noise;
      }

      // EMG: envelope-modulated broadband carrier on active channels, noise
      // only on the reference. MI trials carry no muscle activity.
      Matrix emg = Matrix::Zero(cfg.emg_channels, trial_len);
      if (paradigm == Paradigm::ME) {
        const Matrix carrier = gaussian(n_active, trial_len, emg_rng);
        for (int m = 0; m < n_active; ++m) {
          emg.row(m) = carrier.row(m).cwiseProduct(envelope_curve(env.row(m), trial_len));
        }
      }
      s.emg.samples.middleCols(onset, trial_len) += emg;
      if (!cfg.noise_free) {
        s.emg.samples.middleCols(slot_start, slot) += cfg.emg_noise * gaussian(cfg.emg_channels, slot, emg_rng);
      }
    }
  }
  if (cfg.line_noise_amp > 0.0) {
    for (Eigen::Index t = 0; t < total; ++t) {
      const double v = cfg.line_noise_amp * std::sin(2.0 * std::numbers::pi * 60.0 * t / rate);
      s.emg.samples.col(t).array() += v;
    }
  }
  return s;
}

double plant_check(const SpatialFilterSet& fs, const SynthTruth& truth) {
  if (fs.target_class < 1 || fs.target_class > static_cast<int>(truth.patterns.size())) {
    throw InvalidParameter("filter target class has no planted pattern");
  }
  const Matrix& planted = truth.patterns[fs.target_class - 1];
  if (fs.patterns.cols() != planted.rows()) throw InvalidParameter("channel count mismatch between filters and truth");
  const Eigen::VectorXd top = fs.patterns.row(0).transpose().normalized();
  double best = 0.0;
  for (Eigen::Index c = 0; c < planted.cols(); ++c) {
    best = std::max(best, std::abs(top.dot(planted.col(c).normalized())));
  }
  return best;
}

void write_truth_json(std::ostream& out, const SynthTruth& truth, const SynthConfig& cfg) {
  using nlohmann::json;
  json j;
  j["seed"] = truth.seed;
  j["config"] = {{"n_classes", cfg.n_classes},
                 {"trials_per_class", cfg.trials_per_class},
                 {"eeg_channels", cfg.eeg_channels},
                 {"emg_channels", cfg.emg_channels},
                 {"sample_rate_hz", cfg.sample_rate_hz},
                 {"trial_s", cfg.trial_s},
                 {"gap_s", cfg.gap_s},
                 {"snr_db", cfg.snr_db},
                 {"pattern_spread", cfg.pattern_spread},
                 {"artifact_fraction", cfg.artifact_fraction},
                 {"noise_free", cfg.noise_free},
                 {"include_mi", cfg.include_mi}};
  j["source_gains"] = truth.source_gains;
  json patterns = json::array();
  for (const auto& p : truth.patterns) {
    json cols = json::array();
    for (Eigen::Index c = 0; c < p.cols(); ++c) cols.push_back(std::vector<double>(p.col(c).data(), p.col(c).data() + p.rows()));
    patterns.push_back(cols);
  }
  j["patterns"] = patterns;
  json envelopes = json::array();
  for (const auto& e : truth.envelopes) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
      Eigen::RowVectorXd row = e.row(r);
      rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    envelopes.push_back(rows);
  }
  j["envelopes"] = envelopes;
  out << j.dump(1) << '\n';
}

}  // namespace graspda
