// myoadapt: command-line driver for the EMG pipeline, classifiers and
// evaluation protocols.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "myo/benchmark.hpp"
#include "myo/classifier.hpp"
#include "myo/dataset.hpp"
#include "myo/error.hpp"
#include "myo/kpca.hpp"
#include "myo/kv_config.hpp"
#include "myo/model_io.hpp"
#include "myo/model_selection.hpp"
#include "myo/pipeline.hpp"
#include "myo/protocol.hpp"
#include "myo/rng.hpp"
#include "myo/synthetic.hpp"
#include "myo/text_format.hpp"

#ifndef MYOADAPT_VERSION
#define MYOADAPT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace myo;
using Eigen::Index;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kNumerical = 4 };

std::string sha256_file(const std::string& path) {
  const std::string bytes = text::read_file(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 failed for '" + path + "'");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string default_output_root() {
  if (const char* env = std::getenv("MYOADAPT_OUTPUT"); env != nullptr && *env != '\0') return env;
  return "myoadapt-out";
}

// ---------------------------------------------------------------- options

struct Common {
  std::string out_dir = default_output_root();
  std::string config;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out-dir", c.out_dir,
                  "Output directory (default from MYOADAPT_OUTPUT, else myoadapt-out)");
  sub->add_option("--config", c.config,
                  "key=value file; keys are long flag names, explicit flags win");
  sub->add_option("--seed", c.seed, "Root seed; every random component derives from it");
}

struct Params {
  double lambda = 1.0;
  double gamma = 0.1;
  Index rf_dim = 500;
  Index k = 1;
  std::string params_file;
  std::vector<CLI::Option*> opts;

  bool any_given() const {
    if (!params_file.empty()) return true;
    return std::any_of(opts.begin(), opts.end(), [](CLI::Option* o) { return o->count() > 0; });
  }
};

void add_params(CLI::App* sub, Params& p) {
  p.opts.push_back(sub->add_option("--lambda", p.lambda, "Ridge regularization"));
  p.opts.push_back(sub->add_option("--gamma", p.gamma, "Gaussian kernel width for random features"));
  p.opts.push_back(sub->add_option("--rf-dim", p.rf_dim, "Random feature dimension M"));
  p.opts.push_back(sub->add_option("--k", p.k, "Neighbours for knn"));
  sub->add_option("--params", p.params_file, "Hyperparameter file written by `select`");
}

// Defaults < params file < explicit flags.
Hyperparams resolve(const Params& p, std::uint64_t rf_seed) {
  Hyperparams h;
  h.rf_seed = rf_seed;
  if (!p.params_file.empty()) {
    const auto kv = KeyValues::load(p.params_file);
    h.lambda = kv.get_double("lambda", h.lambda);
    h.gamma = kv.get_double("gamma", h.gamma);
    h.rf_dim = kv.get_int("rf_dim", h.rf_dim);
    h.k = kv.get_int("k", h.k);
    h.rf_seed = kv.get_u64("rf_seed", h.rf_seed);
  }
  if (p.opts[0]->count() || p.params_file.empty()) h.lambda = p.lambda;
  if (p.opts[1]->count() || p.params_file.empty()) h.gamma = p.gamma;
  if (p.opts[2]->count() || p.params_file.empty()) h.rf_dim = p.rf_dim;
  if (p.opts[3]->count() || p.params_file.empty()) h.k = p.k;
  return h;
}

KeyValues params_config(Method m, const Hyperparams& h) {
  KeyValues kv;
  kv.set("method", std::string(to_string(m)));
  kv.set("lambda", h.lambda);
  kv.set("gamma", h.gamma);
  kv.set("rf_dim", static_cast<long long>(h.rf_dim));
  kv.set("k", static_cast<long long>(h.k));
  kv.set("rf_seed", h.rf_seed);
  return kv;
}

struct GridOpts {
  double lambda_min = 1e-4, lambda_max = 1e3;
  std::size_t lambda_count = 50;
  double gamma_min = 5e-4, gamma_max = 50.0;
  std::size_t gamma_count = 50;
  Index rf_min = 10, rf_max = 1000, rf_step = 10;
  Index k_max = 49;
  Index folds = 10;
  double rf_margin = 0.01;
};

void add_grid(CLI::App* sub, GridOpts& g) {
  sub->add_option("--lambda-min", g.lambda_min, "Smallest lambda in the log grid");
  sub->add_option("--lambda-max", g.lambda_max, "Largest lambda in the log grid");
  sub->add_option("--lambda-count", g.lambda_count, "Number of lambda values");
  sub->add_option("--gamma-min", g.gamma_min, "Smallest gamma in the log grid");
  sub->add_option("--gamma-max", g.gamma_max, "Largest gamma in the log grid");
  sub->add_option("--gamma-count", g.gamma_count, "Number of gamma values");
  sub->add_option("--rf-min", g.rf_min, "Smallest random feature dimension");
  sub->add_option("--rf-max", g.rf_max, "Largest random feature dimension");
  sub->add_option("--rf-step", g.rf_step, "Random feature dimension step");
  sub->add_option("--k-max", g.k_max, "Largest k for knn (grid 1..k-max)");
  sub->add_option("--folds", g.folds, "Cross-validation folds");
  sub->add_option("--rf-margin", g.rf_margin,
                  "Pick the smallest M scoring within this margin of the best");
}

modelsel::SelectionOptions selection_options(const GridOpts& g, std::uint64_t seed) {
  modelsel::SelectionOptions o;
  o.grid.lambda = modelsel::logspace(g.lambda_min, g.lambda_max, g.lambda_count);
  o.grid.gamma = modelsel::logspace(g.gamma_min, g.gamma_max, g.gamma_count);
  o.grid.rf_dim = modelsel::integer_range(g.rf_min, g.rf_max, g.rf_step);
  o.grid.k = modelsel::integer_range(1, g.k_max);
  o.folds = g.folds;
  o.rf_margin = g.rf_margin;
  o.seed = derive_seed(seed, "cv");
  o.rf_seed = derive_seed(seed, "rf");
  return o;
}

struct SignalOpts {
  signal::FilterSpec filter;
  signal::RmsSpec rms;
};

void add_signal(CLI::App* sub, SignalOpts& s) {
  sub->add_option("--notch", s.filter.notch_hz, "Powerline notch frequency, Hz");
  sub->add_option("--notch-q", s.filter.notch_q, "Notch quality factor");
  sub->add_option("--band-low", s.filter.band_low_hz, "Bandpass low edge, Hz");
  sub->add_option("--band-high", s.filter.band_high_hz, "Bandpass high edge, Hz");
  sub->add_option("--order", s.filter.butter_order, "Butterworth prototype order");
  sub->add_option("--window", s.rms.window_samples, "RMS window, samples");
  sub->add_option("--hop", s.rms.hop_samples, "RMS hop, samples");
}

// ---------------------------------------------------------------- helpers

std::vector<int> parse_reps(const std::string& s, Index repetitions) {
  std::vector<int> reps;
  if (s == "all") {
    reps.resize(static_cast<std::size_t>(repetitions));
    std::iota(reps.begin(), reps.end(), 0);
    return reps;
  }
  for (auto tok : text::split(s, ',')) {
    const int r = static_cast<int>(text::to_int(text::trim(tok), "repetition"));
    if (r < 0 || r >= repetitions)
      throw InvalidArgument("repetition " + std::to_string(r) + " outside [0, " +
                            std::to_string(repetitions) + ")");
    reps.push_back(r);
  }
  if (reps.empty()) throw InvalidArgument("empty repetition list");
  return reps;
}

data::LabeledSet select_reps(const data::FrameSession& fs, const std::vector<int>& reps) {
  std::vector<Index> rows;
  for (Index i = 0; i < fs.size(); ++i)
    if (std::find(reps.begin(), reps.end(), fs.repetition[static_cast<std::size_t>(i)]) !=
        reps.end())
      rows.push_back(i);
  return data::subset(fs, rows);
}

Method rlsc_method(const std::string& s, const char* command) {
  const Method m = parse_method(s);
  if (!is_rlsc_family(m))
    throw InvalidArgument(std::string(command) +
                          " supports rlsc, rf-rlsc, rlsc-incr and rf-rlsc-incr only");
  return m;
}

class Manifest {
 public:
  Manifest(std::string command, const Common& c) : command_(std::move(command)) {
    kv_.set("command", command_);
    kv_.set("version", std::string(MYOADAPT_VERSION));
    kv_.set("seed", c.seed);
  }
  void input(const std::string& path) {
    const auto i = std::to_string(inputs_++);
    kv_.set("input." + i + ".path", path);
    kv_.set("input." + i + ".sha256", sha256_file(path));
  }
  void output(const std::string& name) {
    kv_.set("output." + std::to_string(outputs_++), name);
  }
  void set(const std::string& key, const std::string& value) { kv_.set(key, value); }
  void options(const CLI::App* sub) {
    for (const CLI::Option* o : sub->get_options()) {
      if (o->get_lnames().empty() || o->get_lnames()[0] == "help") continue;
      std::string value;
      if (o->count() > 0) {
        for (const auto& r : o->results()) value += (value.empty() ? "" : " ") + r;
      } else {
        value = o->get_default_str();
      }
      kv_.set("option." + o->get_lnames()[0], value);
    }
  }
  void write(const fs::path& dir) const { kv_.save((dir / (command_ + ".manifest")).string()); }

 private:
  std::string command_;
  KeyValues kv_;
  int inputs_ = 0;
  int outputs_ = 0;
};

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + c.out_dir + "': " + ec.message());
  return dir;
}

std::string stem_of(const std::string& path) {
  std::string name = fs::path(path).filename().string();
  for (const char* ext : {".csv", ".txt"})
    if (name.size() > std::strlen(ext) && name.ends_with(ext)) name.resize(name.size() - std::strlen(ext));
  return name;
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

}  // namespace

// ---------------------------------------------------------------- commands

namespace {

struct SynthesizeCmd {
  Common common;
  std::string preset = "strong";
  data::ShiftConfig overrides;
  std::vector<CLI::Option*> knobs;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("synthesize", "Generate synthetic multi-session recordings");
    add_common(app, common);
    app->add_option("--preset", preset, "Drift preset: strong or none")
        ->check(CLI::IsMember({"strong", "none"}));
    knobs.push_back(app->add_option("--sessions", overrides.sessions, "Sessions (days)"));
    knobs.push_back(app->add_option("--classes", overrides.classes, "Gesture classes"));
    knobs.push_back(app->add_option("--channels", overrides.channels, "Electrode channels"));
    knobs.push_back(app->add_option("--repetitions", overrides.repetitions, "Repetitions per class"));
    knobs.push_back(app->add_option("--samples-per-rep", overrides.samples_per_rep,
                                    "Samples per repetition"));
    knobs.push_back(app->add_option("--sample-rate", overrides.sample_rate, "Sample rate, Hz"));
    knobs.push_back(app->add_option("--mean-drift", overrides.mean_drift,
                                    "Class-specific log-amplitude drift per session"));
    knobs.push_back(app->add_option("--gain-drift", overrides.gain_drift,
                                    "Per-channel log gain drift per session"));
    knobs.push_back(app->add_option("--rotation", overrides.rotation,
                                    "Electrode ring rotation per session, radians"));
    knobs.push_back(app->add_option("--noise", overrides.noise,
                                    "Repetition amplitude jitter, log scale"));
    knobs.push_back(app->add_option("--amplitude", overrides.amplitude,
                                    "Device units at unit activation"));
    knobs.push_back(app->add_option("--subject", overrides.subject, "Subject id"));
  }

  int run() {
    auto cfg = preset == "strong" ? data::ShiftConfig::strong_shift(common.seed)
                                  : data::ShiftConfig::no_shift(common.seed);
    auto take = [&](std::size_t i, auto& dst, const auto& src) {
      if (knobs[i]->count()) dst = src;
    };
    take(0, cfg.sessions, overrides.sessions);
    take(1, cfg.classes, overrides.classes);
    take(2, cfg.channels, overrides.channels);
    take(3, cfg.repetitions, overrides.repetitions);
    take(4, cfg.samples_per_rep, overrides.samples_per_rep);
    take(5, cfg.sample_rate, overrides.sample_rate);
    take(6, cfg.mean_drift, overrides.mean_drift);
    take(7, cfg.gain_drift, overrides.gain_drift);
    take(8, cfg.rotation, overrides.rotation);
    take(9, cfg.noise, overrides.noise);
    take(10, cfg.amplitude, overrides.amplitude);
    take(11, cfg.subject, overrides.subject);
    cfg.validate();

    const auto dir = prepare_out(common);
    Manifest m("synthesize", common);
    m.options(app);
    cfg.to_config().save((dir / "shift.cfg").string());
    m.output("shift.cfg");
    for (Index s = 0; s < cfg.sessions; ++s) {
      const std::string name = "session_day" + std::to_string(s + 1) + ".csv";
      data::write_session((dir / name).string(), data::generate_session(cfg, s));
      m.output(name);
      log_line("wrote " + (dir / name).string());
    }
    m.write(dir);
    return kOk;
  }
};

struct PreprocessCmd {
  Common common;
  SignalOpts sig;
  std::vector<std::string> inputs;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("preprocess", "Filter, RMS-window and normalize raw sessions");
    add_common(app, common);
    add_signal(app, sig);
    app->add_option("--input", inputs, "Raw session CSV file(s)")->required();
  }

  int run() {
    const auto dir = prepare_out(common);
    Manifest m("preprocess", common);
    m.options(app);
    for (const auto& in : inputs) {
      const auto session = data::load_session(in);
      m.input(in);
      const auto result = preprocess_session(session, sig.filter, sig.rms);
      const std::string name = stem_of(in) + ".frames.csv";
      data::write_frames((dir / name).string(), result.frames);
      KeyValues ext;
      for (Index c = 0; c < result.extrema.channels(); ++c) {
        ext.set("min." + std::to_string(c), result.extrema.min(c));
        ext.set("max." + std::to_string(c), result.extrema.max(c));
      }
      ext.save((dir / (name + ".extrema")).string());
      m.output(name);
      log_line("wrote " + (dir / name).string() + " (" + std::to_string(result.frames.size()) +
               " frames, " + std::to_string(result.frames_per_repetition) + " per repetition)");
    }
    KeyValues spec = sig.filter.to_config();
    const KeyValues rms = sig.rms.to_config();
    for (const auto& [k, v] : rms.entries()) spec.set(k, v);
    spec.save((dir / "preprocess.cfg").string());
    m.write(dir);
    return kOk;
  }
};

struct SelectCmd {
  Common common;
  GridOpts grid;
  std::string frames;
  std::string method = "rlsc";
  std::string reps = "0,1";
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("select", "Cross-validated hyperparameter search");
    add_common(app, common);
    add_grid(app, grid);
    app->add_option("--frames", frames, "Frame file of the training day")->required();
    app->add_option("--method", method, "rlsc, rf-rlsc, rlsc-incr, rf-rlsc-incr, knn or lda");
    app->add_option("--reps", reps, "Repetitions used for selection, comma list or 'all'");
  }

  int run() {
    const Method m = parse_method(method);
    const auto fs = data::load_frames(frames);
    const auto train = select_reps(fs, parse_reps(reps, fs.repetitions));
    const auto result = modelsel::select_hyperparameters(train, m, selection_options(grid, common.seed));

    const auto dir = prepare_out(common);
    Manifest man("select", common);
    man.options(app);
    man.input(frames);
    text::write_file((dir / "cv.tsv").string(), modelsel::format_cv_table(result.table, m));
    params_config(m, result.best).save((dir / "selected.cfg").string());
    man.output("cv.tsv");
    man.output("selected.cfg");
    man.write(dir);
    log_line("selected " + params_config(m, result.best).to_string());
    return kOk;
  }
};

struct TrainCmd {
  Common common;
  Params params;
  GridOpts grid;
  std::string frames;
  std::string method = "rlsc-incr";
  std::string reps = "0,1";
  bool select = false;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("train", "Train an RLSC-family model and store it");
    add_common(app, common);
    add_params(app, params);
    add_grid(app, grid);
    app->add_option("--frames", frames, "Frame file")->required();
    app->add_option("--method", method, "rlsc, rf-rlsc, rlsc-incr or rf-rlsc-incr");
    app->add_option("--reps", reps, "Training repetitions, comma list or 'all'");
    app->add_flag("--select", select, "Cross-validate hyperparameters first");
  }

  int run() {
    const Method m = rlsc_method(method, "train");
    const auto fs = data::load_frames(frames);
    const auto train = select_reps(fs, parse_reps(reps, fs.repetitions));
    const auto dir = prepare_out(common);
    Manifest man("train", common);
    man.options(app);
    man.input(frames);

    Hyperparams h = resolve(params, derive_seed(common.seed, "rf"));
    if (select) {
      const auto result =
          modelsel::select_hyperparameters(train, m, selection_options(grid, common.seed));
      h = result.best;
      text::write_file((dir / "cv.tsv").string(), modelsel::format_cv_table(result.table, m));
      man.output("cv.tsv");
    }
    auto model = make_classifier(m, h, fs.dim(), fs.classes);
    model->fit(train.X, train.labels);
    save_model((dir / "model.bin").string(), dynamic_cast<const RlscClassifier&>(*model));
    params_config(m, h).save((dir / "params.cfg").string());
    man.output("model.bin");
    man.output("params.cfg");
    man.write(dir);
    log_line("trained " + std::string(to_string(m)) + " on " + std::to_string(train.size()) +
             " frames");
    return kOk;
  }
};

struct UpdateCmd {
  Common common;
  std::string model_path;
  std::string frames;
  std::string reps = "0,1";
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("update", "Fold new labelled frames into a stored incremental model");
    add_common(app, common);
    app->add_option("--model", model_path, "Stored model")->required();
    app->add_option("--frames", frames, "Frame file with the update repetitions")->required();
    app->add_option("--reps", reps, "Update repetitions, comma list or 'all'");
  }

  int run() {
    if (!fs::exists(model_path)) throw IoError("model file '" + model_path + "' not found");
    auto model = load_model(model_path);
    if (!model.supports_update())
      throw InvalidArgument("model method '" + std::string(to_string(model.method())) +
                            "' cannot be updated; train with rlsc-incr or rf-rlsc-incr");
    const auto fs = data::load_frames(frames);
    const auto upd = select_reps(fs, parse_reps(reps, fs.repetitions));
    model.update(upd.X, upd.labels);

    const auto dir = prepare_out(common);
    Manifest man("update", common);
    man.options(app);
    man.input(model_path);
    man.input(frames);
    save_model((dir / "model.bin").string(), model);
    man.output("model.bin");
    man.write(dir);
    log_line("updated with " + std::to_string(upd.size()) + " frames; " +
             std::to_string(model.state().samples_seen()) + " seen in total");
    return kOk;
  }
};

std::vector<data::FrameSession> gather_frames(const std::vector<std::string>& frame_files,
                                              const std::vector<std::string>& session_files,
                                              const SignalOpts& sig, Manifest& man) {
  if (frame_files.empty() == session_files.empty())
    throw InvalidArgument("give either --frames or --sessions");
  std::vector<data::FrameSession> out;
  for (const auto& f : frame_files) {
    out.push_back(data::load_frames(f));
    man.input(f);
  }
  for (const auto& f : session_files) {
    out.push_back(preprocess_session(data::load_session(f), sig.filter, sig.rms).frames);
    man.input(f);
  }
  return out;
}

struct EvaluateCmd {
  Common common;
  Params params;
  GridOpts grid;
  SignalOpts sig;
  std::vector<std::string> frames, sessions;
  std::vector<std::string> methods{"rlsc-incr"};
  std::string setting = "auto";
  std::size_t permutations = 60;
  bool all_permutations = false;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("evaluate", "Run batch or incremental protocols over day orders");
    add_common(app, common);
    add_params(app, params);
    add_grid(app, grid);
    add_signal(app, sig);
    app->add_option("--frames", frames, "Frame files, one per day");
    app->add_option("--sessions", sessions, "Raw session files, one per day (preprocessed here)");
    app->add_option("--method", methods, "Method(s) to evaluate");
    app->add_option("--setting", setting, "batch, incremental, or auto (by method)")
        ->check(CLI::IsMember({"auto", "batch", "incremental"}));
    app->add_option("--permutations", permutations,
                    "Day orders per subject: chronological first, then seeded random ones");
    app->add_flag("--all-permutations", all_permutations, "Run every day order");
  }

  int run() {
    std::vector<Method> ms;
    for (const auto& s : methods) ms.push_back(parse_method(s));
    if (ms.empty()) throw InvalidArgument("no method given");
    for (Method m : ms)
      if (setting == "incremental" && !is_incremental(m))
        throw InvalidArgument("setting 'incremental' needs an incremental method, got '" +
                              std::string(to_string(m)) + "'");
    if (permutations < 1 && !all_permutations) throw InvalidArgument("--permutations must be >= 1");

    const auto dir = prepare_out(common);
    Manifest man("evaluate", common);
    man.options(app);
    auto all = gather_frames(frames, sessions, sig, man);

    std::map<int, std::vector<data::FrameSession>> by_subject;
    for (auto& s : all) by_subject[s.subject].push_back(std::move(s));

    std::vector<eval::ProtocolRun> runs;
    for (auto& [subject, days] : by_subject) {
      std::sort(days.begin(), days.end(),
                [](const auto& a, const auto& b) { return a.day < b.day; });
      std::vector<int> ids;
      for (const auto& d : days) ids.push_back(d.day);
      const auto orders =
          all_permutations
              ? data::enumerate_day_orders(ids)
              : data::sample_day_orders(ids, permutations,
                                        derive_seed(common.seed, "orders",
                                                    static_cast<std::uint64_t>(subject)));
      for (Method m : ms) {
        eval::ProtocolOptions o;
        o.method = m;
        o.seed = common.seed;
        o.selection = selection_options(grid, common.seed);
        if (params.any_given()) o.params = resolve(params, derive_seed(common.seed, "rf"));
        const auto set = setting == "auto"
                             ? (is_incremental(m) ? data::Setting::incremental : data::Setting::batch)
                             : data::parse_setting(setting);
        auto r = eval::run_permutations(days, orders, set, o);
        runs.insert(runs.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
      }
    }
    text::write_file((dir / "report.tsv").string(), eval::emit_report(runs));
    text::write_file((dir / "summary.tsv").string(), eval::emit_summary(runs));
    man.output("report.tsv");
    man.output("summary.tsv");
    man.write(dir);
    std::cout << eval::emit_summary(runs);
    return kOk;
  }
};

struct BenchCmd {
  Common common;
  Params params;
  std::vector<std::string> frames;
  std::vector<std::string> methods;
  Index stored = 5000;
  Index test_frames = 500;
  Index repeats = 5;
  Index warmup = 1;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("bench", "Per-prediction latency of trained models");
    add_common(app, common);
    add_params(app, params);
    app->add_option("--frames", frames, "Frame files supplying training and test frames")
        ->required();
    app->add_option("--method", methods, "Methods to benchmark (at least one)");
    app->add_option("--stored", stored, "Training frames stored by each model");
    app->add_option("--test-frames", test_frames, "Frames predicted per timed pass");
    app->add_option("--repeats", repeats, "Timed passes");
    app->add_option("--warmup", warmup, "Untimed passes before timing");
  }

  int run() {
    if (methods.empty()) throw InvalidArgument("bench needs at least one --method");
    std::vector<Method> ms;
    for (const auto& s : methods) ms.push_back(parse_method(s));

    const auto dir = prepare_out(common);
    Manifest man("bench", common);
    man.options(app);
    std::vector<data::LabeledSet> parts;
    Index classes = 0;
    for (const auto& f : frames) {
      const auto fs = data::load_frames(f);
      man.input(f);
      std::vector<Index> rows(static_cast<std::size_t>(fs.size()));
      std::iota(rows.begin(), rows.end(), Index{0});
      parts.push_back(data::subset(fs, rows));
      classes = std::max(classes, fs.classes);
    }
    auto pool = data::concatenate(parts);
    pool.classes = classes;
    std::vector<Index> order(static_cast<std::size_t>(pool.size()));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(common.seed, "bench"));
    std::shuffle(order.begin(), order.end(), rng);
    Index n_train = std::min(stored, pool.size());
    if (n_train < stored)
      warn("only " + std::to_string(pool.size()) + " frames available; storing all of them");
    std::vector<Index> train_rows(order.begin(), order.begin() + n_train);
    std::vector<Index> test_rows(order.begin() + n_train, order.end());
    if (test_rows.empty()) test_rows = train_rows;
    if (static_cast<Index>(test_rows.size()) > test_frames) test_rows.resize(static_cast<std::size_t>(test_frames));

    Eigen::MatrixXd Xtr(n_train, pool.X.cols()), Xte(static_cast<Index>(test_rows.size()), pool.X.cols());
    std::vector<int> ytr;
    for (Index i = 0; i < n_train; ++i) {
      Xtr.row(i) = pool.X.row(train_rows[static_cast<std::size_t>(i)]);
      ytr.push_back(pool.labels[static_cast<std::size_t>(train_rows[static_cast<std::size_t>(i)])]);
    }
    for (std::size_t i = 0; i < test_rows.size(); ++i) Xte.row(static_cast<Index>(i)) = pool.X.row(test_rows[i]);

    const Hyperparams h = resolve(params, derive_seed(common.seed, "rf"));
    std::vector<std::unique_ptr<Classifier>> models;
    std::vector<NamedModel> named;
    for (Method m : ms) {
      models.push_back(make_classifier(m, h, pool.X.cols(), classes));
      models.back()->fit(Xtr, ytr);
      named.push_back({std::string(to_string(m)), models.back().get()});
    }
    const auto entries = latency_benchmark(named, Xte, repeats, warmup);
    text::write_file((dir / "bench.tsv").string(), format_benchmark(entries));
    man.output("bench.tsv");
    man.write(dir);
    std::cout << format_benchmark(entries);
    return kOk;
  }
};

struct KpcaCmd {
  Common common;
  std::vector<std::string> frames;
  double gamma = 0.05;
  Index cap = 8000;
  CLI::App* app = nullptr;

  void attach(CLI::App& root) {
    app = root.add_subcommand("kpca", "Project frames of several days onto two kernel PCA components");
    add_common(app, common);
    app->add_option("--frames", frames, "Frame files, one per day")->required();
    app->add_option("--gamma", gamma, "Gaussian kernel width (0.01 suits limb-difference data)");
    app->add_option("--cap", cap, "Largest frame count fitted before subsampling");
  }

  int run() {
    const auto dir = prepare_out(common);
    Manifest man("kpca", common);
    man.options(app);
    std::vector<data::FrameSession> days;
    for (const auto& f : frames) {
      days.push_back(data::load_frames(f));
      man.input(f);
    }
    Index total = 0;
    for (const auto& d : days) {
      if (d.dim() != days[0].dim()) throw DimensionError("frame files differ in dimension");
      total += d.size();
    }
    Eigen::MatrixXd joint(total, days[0].dim());
    Index at = 0;
    for (const auto& d : days) {
      joint.middleRows(at, d.size()) = d.frames;
      at += d.size();
    }
    const auto model = kpca_fit(joint, gamma, cap, derive_seed(common.seed, "kpca"));
    std::string out = "# myoadapt-kpca v1\nx\ty\tclass\tday\n";
    for (const auto& d : days) {
      const Eigen::MatrixXd p = kpca_project(model, d.frames);
      for (Index i = 0; i < p.rows(); ++i) {
        out += text::format_double(p(i, 0)) + '\t' + text::format_double(p(i, 1)) + '\t' +
               std::to_string(d.labels[static_cast<std::size_t>(i)]) + '\t' +
               std::to_string(d.day) + '\n';
      }
    }
    text::write_file((dir / "kpca.tsv").string(), out);
    man.set("eigenvalue.1", text::format_double(model.eigenvalues(0)));
    man.set("eigenvalue.2", text::format_double(model.eigenvalues(1)));
    man.output("kpca.tsv");
    man.write(dir);
    return kOk;
  }
};

// Expands `--config FILE` into `--key=value` arguments for every key the user
// did not pass explicitly, so explicit flags always win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const auto kv = KeyValues::load(path);
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.starts_with(flag + "=");
    });
  };
  std::vector<std::string> extra;
  for (const auto& [key, value] : kv.entries()) {
    if (key == "config" || given(key)) continue;
    const auto tokens = text::split(value, ' ');
    for (auto tok : tokens) {
      tok = text::trim(tok);
      if (!tok.empty()) extra.push_back("--" + key + "=" + std::string(tok));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"myoadapt: incremental EMG gesture classification under distribution shift"};
  app.set_version_flag("--version", MYOADAPT_VERSION);
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  SynthesizeCmd synthesize;
  PreprocessCmd preprocess;
  SelectCmd select;
  TrainCmd train;
  UpdateCmd update;
  EvaluateCmd evaluate;
  BenchCmd bench;
  KpcaCmd kpca;
  synthesize.attach(app);
  preprocess.attach(app);
  select.attach(app);
  train.attach(app);
  update.attach(app);
  evaluate.attach(app);
  bench.attach(app);
  kpca.attach(app);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }

  try {
    if (synthesize.app->parsed()) return synthesize.run();
    if (preprocess.app->parsed()) return preprocess.run();
    if (select.app->parsed()) return select.run();
    if (train.app->parsed()) return train.run();
    if (update.app->parsed()) return update.run();
    if (evaluate.app->parsed()) return evaluate.run();
    if (bench.app->parsed()) return bench.run();
    if (kpca.app->parsed()) return kpca.run();
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
