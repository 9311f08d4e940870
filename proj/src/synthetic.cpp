#include "myo/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "myo/error.hpp"
#include "myo/rng.hpp"
#include "myo/signal.hpp"

namespace myo::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRestTone = 0.1;
constexpr double kSensorNoise = 1.0;  // device units, white
constexpr double kMainsAmplitude = 15.0;

struct Bump {
  double center, width, height;
};

double ring_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return d > std::numbers::pi ? kTwoPi - d : d;
}

std::vector<std::vector<Bump>> class_profiles(const ShiftConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "profiles"));
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> width(0.25, 0.6);
  std::uniform_real_distribution<double> height(0.5, 1.2);
  std::uniform_real_distribution<double> posture(0.15, 0.3);
  std::vector<std::vector<Bump>> profiles(static_cast<std::size_t>(cfg.classes));
  for (Index c = 0; c < cfg.classes; ++c)
    for (int k = 0; k < 2; ++k)
      profiles[static_cast<std::size_t>(c)].push_back(
          {angle(rng), width(rng), c == 0 ? posture(rng) : height(rng)});
  return profiles;
}

double activation(const std::vector<Bump>& bumps, double theta) {
  double a = kRestTone;
  for (const auto& b : bumps) {
    const double d = ring_distance(theta, b.center);
    a += b.height * std::exp(-d * d / (2.0 * b.width * b.width));
  }
  return a;
}

}  // namespace

ShiftConfig ShiftConfig::no_shift(std::uint64_t seed) {
  ShiftConfig c;
  c.seed = seed;
  return c;
}

ShiftConfig ShiftConfig::strong_shift(std::uint64_t seed) {
  ShiftConfig c;
  c.mean_drift = 0.5;
  c.gain_drift = 0.2;
  c.rotation = 0.2;
  c.seed = seed;
  return c;
}

void ShiftConfig::validate() const {
  if (classes < 1 || channels < 1 || sessions < 1 || repetitions < 1 || samples_per_rep < 1)
    throw InvalidArgument("shift config: counts must be >= 1");
  if (!(sample_rate > 0)) throw InvalidArgument("shift config: sample_rate must be > 0");
  for (double v : {mean_drift, gain_drift, rotation, noise})
    if (!(v >= 0) || !std::isfinite(v))
      throw InvalidArgument("shift config: drift and noise levels must be finite and >= 0");
  if (!(amplitude > 0)) throw InvalidArgument("shift config: amplitude must be > 0");
}

SessionMeta ShiftConfig::meta(Index session) const {
  SessionMeta m;
  m.subject = subject;
  m.day = static_cast<int>(session + 1);
  m.sample_rate = sample_rate;
  m.channels = channels;
  m.classes = classes;
  m.repetitions = repetitions;
  m.samples_per_rep = samples_per_rep;
  return m;
}

KeyValues ShiftConfig::to_config() const {
  KeyValues kv;
  kv.set("classes", static_cast<long long>(classes));
  kv.set("channels", static_cast<long long>(channels));
  kv.set("sessions", static_cast<long long>(sessions));
  kv.set("repetitions", static_cast<long long>(repetitions));
  kv.set("samples_per_rep", static_cast<long long>(samples_per_rep));
  kv.set("sample_rate", sample_rate);
  kv.set("mean_drift", mean_drift);
  kv.set("gain_drift", gain_drift);
  kv.set("rotation", rotation);
  kv.set("noise", noise);
  kv.set("amplitude", amplitude);
  kv.set("subject", subject);
  kv.set("seed", seed);
  return kv;
}

ShiftConfig ShiftConfig::from_config(const KeyValues& kv) {
  ShiftConfig c;
  c.classes = kv.get_int("classes", c.classes);
  c.channels = kv.get_int("channels", c.channels);
  c.sessions = kv.get_int("sessions", c.sessions);
  c.repetitions = kv.get_int("repetitions", c.repetitions);
  c.samples_per_rep = kv.get_int("samples_per_rep", c.samples_per_rep);
  c.sample_rate = kv.get_double("sample_rate", c.sample_rate);
  c.mean_drift = kv.get_double("mean_drift", c.mean_drift);
  c.gain_drift = kv.get_double("gain_drift", c.gain_drift);
  c.rotation = kv.get_double("rotation", c.rotation);
  c.noise = kv.get_double("noise", c.noise);
  c.amplitude = kv.get_double("amplitude", c.amplitude);
  c.subject = static_cast<int>(kv.get_int("subject", c.subject));
  c.seed = kv.get_u64("seed", c.seed);
  c.validate();
  return c;
}

std::vector<Eigen::MatrixXd> session_amplitudes(const ShiftConfig& cfg) {
  cfg.validate();
  const auto profiles = class_profiles(cfg);
  Rng rng(derive_seed(cfg.seed, "drift"));
  std::normal_distribution<double> normal(0.0, 1.0);

  double rotation = 0.0;
  Eigen::VectorXd log_gain = Eigen::VectorXd::Zero(cfg.channels);
  Eigen::MatrixXd log_mean = Eigen::MatrixXd::Zero(cfg.classes, cfg.channels);

  std::vector<Eigen::MatrixXd> out;
  for (Index s = 0; s < cfg.sessions; ++s) {
    if (s > 0) {
      rotation += cfg.rotation * normal(rng);
      for (Index ch = 0; ch < cfg.channels; ++ch) log_gain(ch) += cfg.gain_drift * normal(rng);
      for (Index c = 0; c < cfg.classes; ++c)
        for (Index ch = 0; ch < cfg.channels; ++ch)
          log_mean(c, ch) += cfg.mean_drift * normal(rng);
    }
    Eigen::MatrixXd amp(cfg.classes, cfg.channels);
    for (Index c = 0; c < cfg.classes; ++c)
      for (Index ch = 0; ch < cfg.channels; ++ch) {
        const double theta = kTwoPi * static_cast<double>(ch) /
                                 static_cast<double>(cfg.channels) + rotation;
        amp(c, ch) = std::exp(log_gain(ch) + log_mean(c, ch)) *
                     activation(profiles[static_cast<std::size_t>(c)], theta);
      }
    out.push_back(std::move(amp));
  }
  return out;
}

DeltaSession generate_session(const ShiftConfig& cfg, Index session) {
  cfg.validate();
  if (session < 0 || session >= cfg.sessions)
    throw InvalidArgument("generate_session: session index out of range");
  const Eigen::MatrixXd amp = session_amplitudes(cfg)[static_cast<std::size_t>(session)];

  DeltaSession out;
  out.meta = cfg.meta(session);
  const Index n = out.meta.expected_rows();
  const Index len = cfg.samples_per_rep;
  out.samples.resize(n, cfg.channels);
  out.labels.resize(static_cast<std::size_t>(n));

  Rng rng(derive_seed(cfg.seed, "signal", static_cast<std::uint64_t>(session)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);

  // Block order: class-major, repetitions consecutive.
  Eigen::MatrixXd rep_amp(cfg.classes * cfg.repetitions, cfg.channels);
  for (Index b = 0; b < cfg.classes * cfg.repetitions; ++b) {
    const Index c = b / cfg.repetitions;
    const double effort = std::exp(0.5 * cfg.noise * normal(rng));
    for (Index ch = 0; ch < cfg.channels; ++ch)
      rep_amp(b, ch) = cfg.amplitude * effort * amp(c, ch) * std::exp(cfg.noise * normal(rng));
    for (Index t = 0; t < len; ++t) out.labels[static_cast<std::size_t>(b * len + t)] = static_cast<int>(c);
  }

  // Unit-variance-ish muscle noise shaped by a broad 40-250 Hz bandpass.
  const auto shaping = signal::design_butter_bandpass(1, 40.0, 250.0, cfg.sample_rate);
  const double w_mains = kTwoPi * 50.0 / cfg.sample_rate;
  Eigen::VectorXd white(n);
  for (Index ch = 0; ch < cfg.channels; ++ch) {
    for (Index t = 0; t < n; ++t) white(t) = normal(rng);
    signal::SosFilter shape(shaping, 1);
    shape.process(white);
    const double mains_phase = phase(rng);
    for (Index t = 0; t < n; ++t) {
      const Index b = t / len;
      const double v = rep_amp(b, ch) * white(t) + kSensorNoise * normal(rng) +
                       kMainsAmplitude * std::sin(w_mains * static_cast<double>(t) + mains_phase);
      out.samples(t, ch) = std::round(v);
    }
  }
  return out;
}

std::vector<DeltaSession> generate_synthetic(const ShiftConfig& cfg) {
  std::vector<DeltaSession> out;
  for (Index s = 0; s < cfg.sessions; ++s) out.push_back(generate_session(cfg, s));
  return out;
}

std::vector<FrameSession> generate_radial_fixture(const RadialConfig& cfg) {
  if (cfg.classes < 2 || cfg.dim < 2 || cfg.sessions < 1 || cfg.repetitions < 1 ||
      cfg.frames_per_rep < 1)
    throw InvalidArgument("radial fixture: invalid sizes");
  Rng rng(derive_seed(cfg.seed, "radial"));
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd center = Eigen::VectorXd::Constant(cfg.dim, 0.5);
  std::vector<FrameSession> out;
  for (Index s = 0; s < cfg.sessions; ++s) {
    if (s > 0)
      for (Index i = 0; i < cfg.dim; ++i)
        center(i) += cfg.center_drift * normal(rng) / std::sqrt(static_cast<double>(cfg.dim));
    FrameSession fs;
    fs.subject = 1;
    fs.day = static_cast<int>(s + 1);
    fs.classes = cfg.classes;
    fs.repetitions = cfg.repetitions;
    const Index n = cfg.classes * cfg.repetitions * cfg.frames_per_rep;
    fs.frames.resize(n, cfg.dim);
    Index row = 0;
    for (Index c = 0; c < cfg.classes; ++c)
      for (Index r = 0; r < cfg.repetitions; ++r)
        for (Index f = 0; f < cfg.frames_per_rep; ++f, ++row) {
          Eigen::VectorXd dir(cfg.dim);
          for (Index i = 0; i < cfg.dim; ++i) dir(i) = normal(rng);
          dir.normalize();
          const double radius = cfg.radius_step * static_cast<double>(c + 1) +
                                cfg.shell_noise * normal(rng);
          fs.frames.row(row) = (center + radius * dir).transpose();
          fs.labels.push_back(static_cast<int>(c));
          fs.repetition.push_back(static_cast<int>(r));
        }
    out.push_back(std::move(fs));
  }
  return out;
}

}  // namespace myo::data
