#include "graspda/cli.hpp"

#include "graspda/config.hpp"
#include "graspda/error.hpp"
#include "graspda/recording_io.hpp"
#include "graspda/report.hpp"
#include "graspda/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace graspda::cli {
namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IsolationViolation*>(&e)) return kIsolationError;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const IoError*>(&e) ||
      dynamic_cast<const InvalidParameter*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kConfigError;
  }
  return kFailure;
}

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  writer(out);
  if (!out) throw IoError("failed writing " + path.string());
}

RunConfig resolve(const fs::path& config_path, const Overrides& ov) {
  RunConfig cfg = load_config(config_path);
  if (ov.out) cfg.io.out = ov.out->string();
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.threads) {
    if (*ov.threads < 1) throw ParseError("--threads must be >= 1");
    cfg.threads = *ov.threads;
  }
  if (!ov.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : ov.methods) cfg.methods.push_back(parse_method(m));
  }
  if (ov.paradigm) cfg.paradigms = {parse_paradigm(*ov.paradigm)};
  return cfg;
}

struct Loaded {
  PreparedData data;
  int sample_rate_hz = 0;
};

Loaded load_data(const RunConfig& cfg) {
  Recording eeg, emg;
  std::vector<TrialEvent> events;
  bool have_emg = false;
  if (!cfg.io.eeg.empty()) {
    if (cfg.io.events.empty()) throw ParseError("io.events is required with io.eeg");
    eeg = read_recording(fs::path(cfg.io.eeg));
    events = read_events(fs::path(cfg.io.events));
    if (!cfg.io.emg.empty()) {
      emg = read_recording(fs::path(cfg.io.emg));
      have_emg = true;
    }
  } else if (cfg.synth) {
    SynthSession s = generate_session(*cfg.synth);
    eeg = std::move(s.eeg);
    emg = std::move(s.emg);
    events = std::move(s.events);
    have_emg = true;
  } else {
    throw ParseError("config names no input (set io.eeg/io.events or a synth section)");
  }
  Loaded l;
  l.sample_rate_hz = eeg.sample_rate_hz;
  l.data = prepare(eeg, have_emg ? &emg : nullptr, events, cfg.preprocess, cfg.geometry(eeg.sample_rate_hz));
  return l;
}

const Dataset* dataset_for(const PreparedData& d, Paradigm p) {
  const auto& opt = p == Paradigm::ME ? d.me : d.mi;
  return opt ? &*opt : nullptr;
}

std::vector<ComparisonReport> run_all(const RunConfig& cfg, const Loaded& loaded, std::ostream& log) {
  std::vector<ComparisonReport> reports;
  const bool any_da = std::any_of(cfg.methods.begin(), cfg.methods.end(), uses_augmentation);
  for (Paradigm p : cfg.paradigms) {
    const Dataset* ds = dataset_for(loaded.data, p);
    if (ds == nullptr) {
      log << "skipping " << to_string(p) << ": no trials in the data\n";
      continue;
    }
    if (any_da && ds->labels.size() != ds->trials.size()) {
      throw IncompleteLabels(std::string(to_string(p)) +
                             " augmentation needs segment labels (EMG for ME; ME trials for MI templates)");
    }
    log << "running " << to_string(p) << ": " << ds->trials.size() << " trials, " << cfg.repeats << "x" << cfg.folds
        << "-fold\n";
    reports.push_back(run_comparison(*ds, cfg.cv(loaded.sample_rate_hz)));
  }
  if (reports.empty()) throw ParseError("none of the requested paradigms is present in the data");
  return reports;
}

void print_summary(std::ostream& log, std::span<const ComparisonReport> reports) {
  char buf[128];
  for (const auto& r : reports) {
    for (const auto& m : r.methods) {
      std::snprintf(buf, sizeof buf, "  %-3s %-9s %7.2f%% (+/- %5.2f)", std::string(to_string(r.paradigm)).c_str(),
                    std::string(to_string(m.method)).c_str(), m.mean, m.stddev);
      log << buf;
      if (m.p_vs_baseline) {
        std::snprintf(buf, sizeof buf, "  p=%.4g", *m.p_vs_baseline);
        log << buf;
      }
      log << '\n';
    }
  }
}

void export_augmented(const RunConfig& cfg, const Loaded& loaded, const fs::path& out_dir) {
  const Dataset* ds = loaded.data.me ? &*loaded.data.me : (loaded.data.mi ? &*loaded.data.mi : nullptr);
  if (ds == nullptr || ds->labels.size() != ds->trials.size()) {
    throw IncompleteLabels("augmented export needs a labeled dataset");
  }
  const PipelineParams p = cfg.pipeline(loaded.sample_rate_hz);
  std::vector<EmgLabel> labels;
  for (const auto& l : ds->labels) labels.insert(labels.end(), l.begin(), l.end());
  const SegmentBank bank = build_bank(ds->trials, labels, p.geometry);
  const auto augmented = augment_dataset(ds->trials, bank, p.multiplier, p.augment, substream_seed(cfg.seed, {400}));

  Recording rec;
  rec.modality = Modality::EEG;
  rec.sample_rate_hz = loaded.sample_rate_hz;
  const Eigen::Index len = ds->trials.front().length();
  rec.samples.resize(ds->trials.front().channels(), len * static_cast<Eigen::Index>(augmented.size()));
  rec.channel_names = cfg.preprocess.channels.empty() ? motor_channel_names(static_cast<int>(rec.samples.rows()))
                                                      : cfg.preprocess.channels;
  std::vector<TrialEvent> events;
  for (std::size_t i = 0; i < augmented.size(); ++i) {
    rec.samples.middleCols(static_cast<Eigen::Index>(i) * len, len) = augmented[i].data;
    events.push_back({augmented[i].aug_id, augmented[i].class_label, static_cast<std::int64_t>(i) * len,
                      augmented[i].paradigm});
  }
  write_recording(out_dir / "augmented.bcir", rec);
  write_events(out_dir / "augmented_events.csv", events);
  write_file(out_dir / "provenance.csv", [&](std::ostream& o) { write_provenance_csv(o, augmented); });
  write_file(out_dir / "label_bank.csv", [&](std::ostream& o) { write_label_csv(o, bank.labels); });
}

}  // namespace

int cmd_synth(const std::optional<fs::path>& config_path, const Overrides& ov, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    SynthConfig sc;
    fs::path out = "out";
    if (config_path) {
      const RunConfig cfg = load_config(*config_path);
      if (cfg.synth) sc = *cfg.synth;
      out = cfg.io.out;
    }
    if (ov.out) out = *ov.out;
    if (ov.seed) sc.seed = *ov.seed;
    fs::create_directories(out);
    const SynthSession s = generate_session(sc);
    write_recording(out / "eeg.bcir", s.eeg);
    write_recording(out / "emg.bcir", s.emg);
    write_events(out / "events.csv", s.events);
    write_file(out / "truth.json", [&](std::ostream& o) { write_truth_json(o, s.truth, sc); });
    log << "wrote " << s.events.size() << " trials to " << out.string() << '\n';
    return kOk;
  });
}

int cmd_run(const fs::path& config_path, const Overrides& ov, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve(config_path, ov);
    const fs::path out = cfg.io.out;
    fs::create_directories(out);
    const Loaded loaded = load_data(cfg);
    const auto reports = run_all(cfg, loaded, log);

    write_file(out / "report.csv", [&](std::ostream& o) { write_report_csv(o, reports); });
    for (const auto& r : reports) {
      for (const auto& m : r.methods) {
        const std::string stem = "confusion_" + std::string(to_string(m.method)) + "_" + std::string(to_string(r.paradigm));
        write_file(out / (stem + ".csv"), [&](std::ostream& o) { write_confusion_csv(o, m.confusion); });
        write_file(out / (stem + ".svg"), [&](std::ostream& o) {
          write_confusion_svg(o, m.confusion, std::string(to_string(m.method)) + " " + std::string(to_string(r.paradigm)));
        });
      }
    }

    const Dataset* first = dataset_for(loaded.data, reports.front().paradigm);
    const PipelineParams p = cfg.pipeline(loaded.sample_rate_hz);
    const bool any_fb = std::any_of(cfg.methods.begin(), cfg.methods.end(), uses_filter_bank);
    const bool any_single = std::any_of(cfg.methods.begin(), cfg.methods.end(), [](Method m) { return !uses_filter_bank(m); });
    write_file(out / "filters.csv", [&](std::ostream& o) {
      bool header = true;
      if (any_single) {
        write_filters_csv(o, fit_all_filters(*first, p, false), header);
        header = false;
      }
      if (any_fb) write_filters_csv(o, fit_all_filters(*first, p, true), header);
    });
    write_file(out / "resolved_config.json", [&](std::ostream& o) { o << config_to_json(cfg).dump(2) << '\n'; });
    if (cfg.io.export_augmented) export_augmented(cfg, loaded, out);

    print_summary(log, reports);
    log << "wrote results to " << out.string() << '\n';
    return kOk;
  });
}

int cmd_sweep(const fs::path& config_path, const std::string& param, const std::vector<double>& values,
              const Overrides& ov, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (param != "ratio" && param != "multiplier" && param != "snr_db" && param != "trials_per_class") {
      throw ParseError("unknown sweep parameter '" + param + "' (ratio, multiplier, snr_db, trials_per_class)");
    }
    if (values.empty()) throw ParseError("sweep needs at least one value");
    const RunConfig base = resolve(config_path, ov);
    const bool regenerate = param == "snr_db" || param == "trials_per_class";
    if (regenerate && !base.synth) throw ParseError("sweeping " + param + " needs a synth section");
    const fs::path out = base.io.out;
    fs::create_directories(out);

    std::optional<Loaded> shared;
    if (!regenerate) shared = load_data(base);
    std::vector<SweepRow> rows;
    for (double v : values) {
      RunConfig cfg = base;
      if (param == "ratio") {
        if (!(v >= 0.0 && v <= 1.0)) throw ParseError("ratio values must lie in [0, 1]");
        cfg.ratio = v;
      } else if (param == "multiplier") {
        if (v < 0 || v != std::floor(v)) throw ParseError("multiplier values must be non-negative integers");
        cfg.multiplier = static_cast<int>(v);
      } else if (param == "snr_db") {
        cfg.synth->snr_db = v;
      } else {
        if (v < 1 || v != std::floor(v)) throw ParseError("trials_per_class values must be positive integers");
        cfg.synth->trials_per_class = static_cast<int>(v);
      }
      log << param << " = " << v << '\n';
      const Loaded loaded = regenerate ? load_data(cfg) : *shared;
      for (const auto& r : run_all(cfg, loaded, log)) {
        for (const auto& m : r.methods) rows.push_back({param, v, m.method, r.paradigm, m.mean, m.stddev});
      }
    }
    write_file(out / "sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, rows); });
    log << "wrote " << (out / "sweep.csv").string() << '\n';
    return kOk;
  });
}

int cmd_inspect(const fs::path& recording, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(recording, std::ios::binary);
    if (!in) throw IoError("cannot open " + recording.string());
    const RecordingHeader h = read_recording_header(in);
    log << "file:       " << recording.string() << '\n'
        << "version:    " << h.version << '\n'
        << "modality:   " << to_string(h.modality) << '\n'
        << "rate_hz:    " << h.sample_rate_hz << '\n'
        << "channels:   " << h.channel_names.size() << '\n'
        << "samples:    " << h.samples_per_channel << '\n'
        << "duration_s: " << (h.sample_rate_hz > 0 ? static_cast<double>(h.samples_per_channel) / h.sample_rate_hz : 0.0)
        << '\n'
        << "names:     ";
    for (const auto& n : h.channel_names) log << ' ' << n;
    log << '\n';
    return kOk;
  });
}

namespace {

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-based EEG segment augmentation for grasp decoding"};
  app.require_subcommand(1);

  std::string config, out, paradigm, param, inspect_path;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> methods, values;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config, "JSON run configuration");
    if (config_required) opt->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "random seed override");
  };
  auto add_eval = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "worker threads for fold-level parallelism")->check(CLI::PositiveNumber);
    sub->add_option("--method", methods, "methods (CSP,CSP_DA,FBCSP,FBCSP_DA)")->delimiter(',');
    sub->add_option("--paradigm", paradigm, "ME or MI");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic EEG/EMG session");
  add_common(synth, false);
  auto* run = app.add_subcommand("run", "cross-validated method comparison");
  add_common(run, true);
  add_eval(run);
  auto* sweep = app.add_subcommand("sweep", "repeat the comparison over a parameter grid");
  add_common(sweep, true);
  add_eval(sweep);
  sweep->add_option("--param", param, "ratio, multiplier, snr_db or trials_per_class")->required();
  sweep->add_option("--values", values, "comma-separated values")->delimiter(',');
  auto* inspect = app.add_subcommand("inspect", "print a recording header");
  inspect->add_option("file", inspect_path, "recording file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  Overrides ov;
  auto* active = app.get_subcommands().front();
  if (!out.empty()) ov.out = out;
  auto given = [&](const std::string& name) {
    const auto* opt = active->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--seed")) ov.seed = seed;
  if (given("--threads")) ov.threads = threads;
  ov.methods = split_list(methods);
  if (!paradigm.empty()) ov.paradigm = paradigm;

  if (active == synth) {
    return cmd_synth(config.empty() ? std::nullopt : std::optional<fs::path>(config), ov, std::cout, std::cerr);
  }
  if (active == run) return cmd_run(config, ov, std::cout, std::cerr);
  if (active == sweep) {
    std::vector<double> parsed;
    for (const auto& v : split_list(values)) {
      try {
        std::size_t used = 0;
        parsed.push_back(std::stod(v, &used));
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        std::cerr << "error: bad sweep value '" << v << "'\n";
        return kConfigError;
      }
    }
    return cmd_sweep(config, param, parsed, ov, std::cout, std::cerr);
  }
  return cmd_inspect(inspect_path, std::cout, std::cerr);
}

}  // namespace graspda::cli
