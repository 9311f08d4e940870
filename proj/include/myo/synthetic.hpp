#pragma once

// Synthetic multi-session recordings with controllable distribution shift.
//
// Every electrode sits on a ring around the forearm. Each gesture activates
// two smooth bumps of muscle activity on that ring; rest holds two weak
// posture bumps over a low tone.
// A channel's raw signal is band-limited Gaussian noise whose amplitude
// follows the active pattern, plus a weak 50 Hz interference and white sensor
// noise, quantized to integer device units.
//
// Across sessions three compounding random walks shift the data:
//   rotation    electrode ring displacement (radians per session step)
//   mean_drift  class- and channel-specific log-amplitude drift
//   gain_drift  per-channel log gain drift (mostly removed by min-max)
// `noise` sets the repetition-to-repetition amplitude jitter (log scale).

#include <cstdint>
#include <vector>

#include "myo/dataset.hpp"
#include "myo/kv_config.hpp"

namespace myo::data {

struct ShiftConfig {
  Index classes = 7;
  Index channels = 64;
  Index sessions = 6;
  Index repetitions = 10;
  Index samples_per_rep = 4000;
  double sample_rate = 2000.0;
  double mean_drift = 0.0;
  double gain_drift = 0.0;
  double rotation = 0.0;
  double noise = 0.08;
  double amplitude = 200.0;  // device units at unit activation
  int subject = 1;
  std::uint64_t seed = 1;

  /// No drift at all: sessions are i.i.d. draws of the same subject.
  static ShiftConfig no_shift(std::uint64_t seed = 1);
  /// Drift large enough that a day-1 model degrades sharply on later days.
  static ShiftConfig strong_shift(std::uint64_t seed = 1);

  void validate() const;
  SessionMeta meta(Index session) const;
  KeyValues to_config() const;
  static ShiftConfig from_config(const KeyValues& kv);
};

/// Per-session, per-class, per-channel activation amplitude (before the
/// repetition jitter); amplitudes(s)(c, ch).
std::vector<Eigen::MatrixXd> session_amplitudes(const ShiftConfig& config);

DeltaSession generate_session(const ShiftConfig& config, Index session);
std::vector<DeltaSession> generate_synthetic(const ShiftConfig& config);

/// Frame-level fixture whose classes are concentric shells around a centre
/// that drifts between sessions: not linearly separable, easily separable
/// with a Gaussian kernel.
struct RadialConfig {
  Index classes = 3;
  Index dim = 6;
  Index sessions = 6;
  Index repetitions = 10;
  Index frames_per_rep = 37;
  double radius_step = 0.6;
  double shell_noise = 0.08;
  double center_drift = 0.3;
  std::uint64_t seed = 1;
};

std::vector<FrameSession> generate_radial_fixture(const RadialConfig& config);

}  // namespace myo::data
