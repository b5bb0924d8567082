// Acceptance checks for the whole pipeline. Prints one PASS/FAIL line per
// criterion and exits non-zero if any criterion fails.

#include "graspda/augment.hpp"
#include "graspda/cli.hpp"
#include "graspda/emg_label.hpp"
#include "graspda/eval.hpp"
#include "graspda/features.hpp"
#include "graspda/signal.hpp"
#include "graspda/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace graspda;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  return m;
}

PreparedData session(const SynthConfig& cfg) {
  const SynthSession s = generate_session(cfg);
  return prepare(s.eeg, &s.emg, s.events, PreprocessParams{}, SegmentGeometry{});
}

// Random training trials with random labels, 15 segments each.
struct FakeTraining {
  std::vector<Trial> trials;
  std::vector<EmgLabel> labels;
};

FakeTraining fake_training(int n_trials, int channels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FakeTraining f;
  for (int t = 0; t < n_trials; ++t) {
    const int cls = t % 5 + 1;
    f.trials.push_back(Trial::make(static_cast<std::uint32_t>(t), cls, Paradigm::ME, 1000, gaussian(channels, 4000, rng)));
    for (int j = 0; j < 15; ++j) {
      EmgLabel l;
      l.rms = Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng));
      l.source_trial_id = static_cast<std::uint32_t>(t);
      l.class_label = cls;
      l.segment_index = j;
      f.labels.push_back(l);
    }
  }
  return f;
}

Outcome segmentation_geometry() {
  const auto t0 = Clock::now();
  const auto f = fake_training(200, 2, 1);
  const auto segs = segment_trial(f.trials.front(), 500.0, 250.0);
  const SegmentBank bank = build_bank(f.trials, f.labels, SegmentGeometry::from_ms(500.0, 250.0, 1000));
  const double dt = seconds_since(t0);
  const bool ok = segs.size() == 15 && bank.entries.size() == 3000 && dt < 1.0;
  return {ok, std::to_string(segs.size()) + " segments per 4 s trial, bank of " + std::to_string(bank.entries.size()) +
                  " from 200 trials, " + fmt("%.3f s", dt)};
}

Outcome switch_ratio() {
  const auto t0 = Clock::now();
  bool ok = true;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Rng rng(s);
    ok = ok && select_switch_positions(15, 0.6, rng).size() == 9;
  }
  const auto f = fake_training(50, 4, 2);
  const SegmentBank bank = build_bank(f.trials, f.labels);
  const auto augmented = augment_dataset(f.trials, bank, 1, AugmentParams{0.6, 11}, 3);
  std::size_t good = 0;
  for (const auto& a : augmented) {
    const auto n = std::count_if(a.provenance.begin(), a.provenance.end(), [](const SwitchRecord& r) { return r.switched; });
    good += a.provenance.size() == 15 && n == 9;
  }
  const double dt = seconds_since(t0);
  ok = ok && good == augmented.size() && augmented.size() == 50 && dt < 1.0;
  return {ok, std::to_string(good) + "/" + std::to_string(augmented.size()) +
                  " augmented trials with exactly 9 switched records, " + fmt("%.3f s", dt)};
}

Outcome test_isolation(const Dataset& ds, ComparisonReport& report_out, double& runtime) {
  const auto t0 = Clock::now();
  CvConfig cv;
  cv.seed = 1;
  try {
    report_out = run_comparison(ds, cv);
  } catch (const IsolationViolation& e) {
    return {false, std::string("isolation violation: ") + e.what()};
  }
  runtime = seconds_since(t0);
  const bool ok = report_out.isolation_violations == 0 && report_out.isolation_checks == 50 && runtime < 600.0;
  return {ok, std::to_string(report_out.isolation_violations) + " test-trial sources over " +
                  std::to_string(report_out.isolation_checks) + " augmented folds (bank " +
                  std::to_string(report_out.max_bank_entries) + " entries), " + fmt("%.0f s", runtime)};
}

// Mean trace-normalized covariance, shrunk, as a reference for the fit.
Matrix class_covariance(const std::vector<Matrix>& trials, double gamma) {
  const Eigen::Index n = trials.front().rows();
  Matrix acc = Matrix::Zero(n, n);
  for (const auto& x : trials) {
    const Matrix c = x.colwise() - x.rowwise().mean();
    const Matrix s = c * c.transpose();
    acc += s / s.trace();
  }
  acc /= static_cast<double>(trials.size());
  return (1.0 - gamma) * acc + gamma * acc.trace() / static_cast<double>(n) * Matrix::Identity(n, n);
}

Outcome csp_correctness() {
  const auto t0 = Clock::now();
  std::ostringstream detail;
  bool ok = true;

  // (a) generalized eigen residual on every fitted filter of a synthetic fit.
  {
    SynthConfig cfg;
    cfg.trials_per_class = 10;
    const PreparedData d = session(cfg);
    const PipelineParams p;
    double worst = 0.0;
    std::size_t checked = 0;
    for (bool fb : {false, true}) {
      for (const auto& fs : fit_all_filters(*d.me, p, fb)) {
        std::vector<Matrix> target, rest;
        for (const auto& t : d.me->trials) {
          (t.class_label == fs.target_class ? target : rest)
              .push_back(bandpass(t.data(), t.sample_rate_hz, fs.band.low_hz, fs.band.high_hz, p.filter_order));
        }
        const Matrix c1 = class_covariance(target, p.csp.shrinkage);
        const Matrix c2 = class_covariance(rest, p.csp.shrinkage);
        for (Eigen::Index r = 0; r < fs.size(); ++r) {
          const Eigen::VectorXd w = fs.filters.row(r).transpose();
          worst = std::max(worst, (c1 * w - fs.eigenvalues(r) * (c1 + c2) * w).norm() / w.norm());
          ++checked;
        }
      }
    }
    ok = ok && worst <= 1e-8 && checked == 6 * 5 * 10;
    detail << "(a) max residual " << fmt("%.2e", worst) << " over " << checked << " filters; ";
  }

  // (b) two-channel planted case against the closed-form 2x2 solution.
  {
    std::mt19937_64 rng(5);
    std::vector<Matrix> target, rest;
    for (int i = 0; i < 10; ++i) target.push_back(Eigen::Vector2d(3.0, 0.5).asDiagonal() * gaussian(2, 1000, rng));
    for (int i = 0; i < 10; ++i) rest.push_back(Eigen::Vector2d(0.5, 3.0).asDiagonal() * gaussian(2, 1000, rng));
    const SpatialFilterSet fs = csp_fit(target, rest, CspParams{1, 0.05});
    const Matrix a = class_covariance(target, 0.05);
    const Matrix b = a + class_covariance(rest, 0.05);
    const double qa = b(0, 0) * b(1, 1) - b(0, 1) * b(0, 1);
    const double qb = -(a(0, 0) * b(1, 1) + a(1, 1) * b(0, 0) - 2.0 * a(0, 1) * b(0, 1));
    const double qc = a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1);
    const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
    double worst = 0.0;
    for (int r = 0; r < 2; ++r) {
      const double l = r == 0 ? (-qb + disc) / (2.0 * qa) : (-qb - disc) / (2.0 * qa);
      const Eigen::Vector2d w = Eigen::Vector2d(-(a(0, 1) - l * b(0, 1)), a(0, 0) - l * b(0, 0)).normalized();
      const Eigen::Vector2d got = fs.filters.row(r).transpose();
      worst = std::max(worst, std::min((got - w).norm(), (got + w).norm()));
    }
    ok = ok && worst <= 1e-6;
    detail << "(b) 2x2 oracle deviation " << fmt("%.2e", worst) << "; ";
  }

  // (c) planted pattern recovery at 20 dB.
  {
    SynthConfig cfg;
    cfg.snr_db = 20.0;
    const SynthSession s = generate_session(cfg);
    const PreparedData d = prepare(s.eeg, &s.emg, s.events, PreprocessParams{}, SegmentGeometry{});
    double worst = 1.0;
    for (const auto& fs : fit_all_filters(*d.me, PipelineParams{}, false)) worst = std::min(worst, plant_check(fs, s.truth));
    ok = ok && worst >= 0.9;
    detail << "(c) min plant_check " << fmt("%.4f", worst) << " at 20 dB; ";
  }
  detail << fmt("%.1f s", seconds_since(t0));
  return {ok, detail.str()};
}

Outcome pipeline_sanity(const Dataset& noisy) {
  const auto t0 = Clock::now();
  std::ostringstream detail;
  bool ok = true;
  CvConfig cv;
  cv.seed = 2;

  SynthConfig clean_cfg;
  clean_cfg.noise_free = true;
  const PreparedData clean = session(clean_cfg);
  const ComparisonReport r = run_comparison(*clean.me, cv);
  detail << "noiseless:";
  for (const auto& m : r.methods) {
    ok = ok && m.mean >= 95.0;
    detail << ' ' << to_string(m.method) << '=' << fmt("%.2f%%", m.mean);
  }

  const Dataset permuted = permute_labels(noisy, 99);
  const ComparisonReport p = run_comparison(permuted, cv);
  detail << "; permuted:";
  for (const auto& m : p.methods) {
    ok = ok && std::abs(m.mean - 20.0) <= 6.0 && m.fold_accuracies.size() == 25;
    detail << ' ' << to_string(m.method) << '=' << fmt("%.2f%%", m.mean);
  }
  const double dt = seconds_since(t0);
  ok = ok && dt <= 600.0;
  detail << "; " << fmt("%.0f s", dt);
  return {ok, detail.str()};
}

Outcome augmentation_benefit() {
  const auto t0 = Clock::now();
  int fb_wins = 0, csp_wins = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig cfg;
    cfg.trials_per_class = 15;
    cfg.snr_db = 0.0;
    cfg.seed = seed;
    const PreparedData d = session(cfg);
    CvConfig cv;
    cv.seed = seed;
    const ComparisonReport r = run_comparison(*d.me, cv);
    const double csp = r.at(Method::CSP).mean, csp_da = r.at(Method::CSP_DA).mean;
    const double fb = r.at(Method::FBCSP).mean, fb_da = r.at(Method::FBCSP_DA).mean;
    csp_wins += csp_da >= csp;
    fb_wins += fb_da >= fb;
    per_seed << "\n    seed " << seed << ": CSP " << fmt("%.2f", csp) << " CSP_DA " << fmt("%.2f", csp_da) << " FBCSP "
             << fmt("%.2f", fb) << " FBCSP_DA " << fmt("%.2f", fb_da);
  }
  const double dt = seconds_since(t0);
  const bool ok = fb_wins >= 8 && csp_wins >= 8 && dt <= 1800.0;
  return {ok, "FBCSP_DA >= FBCSP in " + std::to_string(fb_wins) + "/10 seeds, CSP_DA >= CSP in " +
                  std::to_string(csp_wins) + "/10 seeds, " + fmt("%.0f s", dt) + per_seed.str()};
}

Outcome oracle_equivalence() {
  const auto f = fake_training(200, 1, 7);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> pick_trial(0, 199);
  int agree = 0;
  for (int q = 0; q < 1000; ++q) {
    EmgLabel query;
    query.rms = Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng));
    query.source_trial_id = pick_trial(rng);
    const auto exclude = [&](const EmgLabel& l) { return l.source_trial_id == query.source_trial_id; };
    const std::size_t got = nearest_label(query, f.labels, exclude);
    // Linear scan: first strict minimum in pool order, which is already
    // sorted by (trial, segment).
    std::size_t best = f.labels.size();
    double best_err = INFINITY;
    for (std::size_t i = 0; i < f.labels.size(); ++i) {
      if (exclude(f.labels[i])) continue;
      const Eigen::VectorXd d = f.labels[i].rms - query.rms;
      const double err = d.squaredNorm() / static_cast<double>(d.size());
      if (err < best_err) {
        best_err = err;
        best = i;
      }
    }
    agree += got == best;
  }

  const auto label = [](std::initializer_list<double> v) {
    EmgLabel l;
    l.rms = Eigen::VectorXd::Map(std::data(v), static_cast<Eigen::Index>(v.size()));
    return l;
  };
  double worst = 0.0;
  worst = std::max(worst, std::abs(mse(label({1, 0, 0, 0}), label({0, 1, 0, 0})) - 0.5));
  worst = std::max(worst, std::abs(mse(label({2, 2, 2, 2}), label({0, 0, 0, 0})) - 4.0));
  worst = std::max(worst, std::abs(mse(label({0.3, 0.1, 0.7, 0.2}), label({0.3, 0.1, 0.7, 0.2}))));
  Matrix seg(3, 2);
  seg << 3, 4, 2.5, 2.5, 0, 0;
  const Eigen::VectorXd r = rms(seg);
  worst = std::max(worst, std::abs(r(0) - std::sqrt(12.5)));
  worst = std::max(worst, std::abs(r(1) - 2.5));
  worst = std::max(worst, std::abs(r(2)));
  Matrix neg = Matrix::Constant(1, 7, -1.75);
  worst = std::max(worst, std::abs(rms(neg)(0) - 1.75));

  Segment emg;
  emg.source = std::make_shared<const Matrix>(Eigen::VectorXd::LinSpaced(5, 5.0, 1.0).replicate(1, 500));
  emg.width = 500;
  const EmgLabel built = build_label(emg, 4);
  worst = std::max(worst, (built.rms - Eigen::Vector4d(4, 3, 2, 1)).cwiseAbs().maxCoeff());

  const bool ok = agree == 1000 && worst <= 1e-12;
  return {ok, std::to_string(agree) + "/1000 nearest_label queries match the linear scan over " +
                  std::to_string(f.labels.size()) + " labels; closed-form max error " + fmt("%.1e", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("graspda_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({"eval": {"repeats": 2, "folds": 5, "seed": 5},
    "synth": {"trials_per_class": 10, "snr_db": 0, "seed": 12}})";
  std::ostringstream log, err;
  cli::Overrides a, b;
  a.out = dir / "a";
  b.out = dir / "b";
  const int ca = cli::cmd_run(dir / "config.json", a, log, err);
  const int cb = cli::cmd_run(dir / "config.json", b, log, err);
  int same = 0, files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const std::string name = entry.path().filename().string();
    if (name != "report.csv" && name.rfind("confusion_", 0) != 0) continue;
    if (entry.path().extension() != ".csv") continue;
    ++files;
    same += fs::exists(dir / "b" / name) && slurp(entry.path()) == slurp(dir / "b" / name);
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  const bool ok = ca == 0 && cb == 0 && files == 5 && same == files;
  return {ok, std::to_string(same) + "/" + std::to_string(files) + " report/confusion CSVs byte-identical (exit codes " +
                  std::to_string(ca) + ", " + std::to_string(cb) + ")" + (err.str().empty() ? "" : "; " + err.str())};
}

// Steady-state output/input amplitude ratio of a tone, in dB.
double tone_gain_db(const std::function<Matrix(const Matrix&)>& filter, double freq_hz) {
  constexpr int rate = 1000, n = 8000;
  Matrix x(1, n);
  for (int t = 0; t < n; ++t) x(0, t) = std::sin(2.0 * std::numbers::pi * freq_hz * t / rate);
  const Matrix y = filter(x);
  const double in = x.row(0).segment(n / 4, n / 2).norm();
  const double out = y.row(0).segment(n / 4, n / 2).norm();
  return 20.0 * std::log10(out / in);
}

Outcome filter_responses() {
  const auto t0 = Clock::now();
  const auto notch60 = [](const Matrix& x) { return notch(x, 1000, 60.0, 30.0); };
  const auto emg_band = [](const Matrix& x) { return bandpass(x, 1000, 10.0, 500.0, 4); };
  const auto eeg_band = [](const Matrix& x) { return bandpass(x, 1000, 8.0, 30.0, 4); };
  const double notch_att = -tone_gain_db(notch60, 60.0);
  const double stop_att = -tone_gain_db(emg_band, 2.0);
  double ripple = 0.0;
  for (double f : {20.0, 40.0, 100.0, 150.0, 250.0, 350.0, 450.0}) ripple = std::max(ripple, std::abs(tone_gain_db(emg_band, f)));
  double eeg_ripple = 0.0;
  for (double f : {12.0, 16.0, 20.0}) eeg_ripple = std::max(eeg_ripple, std::abs(tone_gain_db(eeg_band, f)));
  const double notch_pass = std::max(std::abs(tone_gain_db(notch60, 20.0)), std::abs(tone_gain_db(notch60, 150.0)));
  const double dt = seconds_since(t0);
  const bool ok = notch_att >= 20.0 && stop_att >= 20.0 && ripple <= 1.0 && eeg_ripple <= 1.0 && notch_pass <= 1.0 &&
                  dt < 1.0;
  return {ok, "notch 60 Hz " + fmt("%.1f dB", notch_att) + ", 10-500 Hz band at 2 Hz " + fmt("%.1f dB", stop_att) +
                  ", passband ripple " + fmt("%.3f dB", ripple) + " (8-30 Hz band " + fmt("%.3f dB", eeg_ripple) +
                  ", notch off-centre " + fmt("%.3f dB", notch_pass) + "), " + fmt("%.3f s", dt)};
}

Outcome statistical_calibration() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> p;
  for (int sim = 0; sim < 1000; ++sim) {
    std::vector<double> a(25), b(25);
    for (int i = 0; i < 25; ++i) {
      const double fold = 8.0 * n(rng);  // shared fold difficulty
      a[i] = 45.0 + fold + 5.0 * n(rng);
      b[i] = 45.0 + fold + 5.0 * n(rng);
    }
    p.push_back(paired_test(a, b));
  }
  std::sort(p.begin(), p.end());
  double d = 0.0;
  const auto m = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - p[i], p[i] - static_cast<double>(i) / m});
  }
  return {d <= 0.05, "KS distance " + fmt("%.4f", d) + " from uniform over 1000 simulated 25-fold comparisons"};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const char* name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << name << "): " << o.detail << std::endl;
    failures += !o.pass;
  };
  const auto guarded = [](const std::function<Outcome()>& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "segmentation geometry", guarded(segmentation_geometry));
  report(2, "switch ratio", guarded(switch_ratio));

  SynthConfig default_cfg;
  const PreparedData default_session = session(default_cfg);
  ComparisonReport default_report;
  double isolation_runtime = 0.0;
  report(3, "test isolation",
         guarded([&] { return test_isolation(*default_session.me, default_report, isolation_runtime); }));
  report(4, "CSP correctness", guarded(csp_correctness));
  report(5, "pipeline sanity", guarded([&] { return pipeline_sanity(*default_session.me); }));
  report(6, "directional augmentation benefit", guarded(augmentation_benefit));
  report(7, "oracle equivalence", guarded(oracle_equivalence));
  report(8, "determinism", guarded(determinism));
  report(9, "filter responses", guarded(filter_responses));
  report(10, "statistical calibration", guarded(statistical_calibration));

  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
