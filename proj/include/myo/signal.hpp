#pragma once

// EMG conditioning: powerline notch, Butterworth bandpass, sliding-window RMS
// and per-session min-max normalization.
//
// Sample matrices are time x channel. Every filter is a cascade of
// second-order sections in transposed direct form II, run causally with
// per-channel state, so offline and streaming use produce identical bits.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "myo/kv_config.hpp"

namespace myo::signal {

using Eigen::Index;

struct RawEmg {
  Eigen::MatrixXd samples;  // n_samples x n_channels, device units
  double sample_rate = 2000.0;

  Index sample_count() const { return samples.rows(); }
  Index channel_count() const { return samples.cols(); }
  void validate() const;
};

struct FilterSpec {
  double notch_hz = 50.0;
  double notch_q = 30.0;
  double band_low_hz = 20.0;
  double band_high_hz = 500.0;
  int butter_order = 4;

  /// Throws InvalidArgument unless every frequency is below Nyquist and the
  /// band is well formed.
  void validate(double sample_rate) const;

  KeyValues to_config() const;
  static FilterSpec from_config(const KeyValues& kv);
};

struct RmsSpec {
  Index window_samples = 400;
  Index hop_samples = 100;

  void validate() const;

  KeyValues to_config() const;
  static RmsSpec from_config(const KeyValues& kv);
};

/// Normalized biquad: y = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

/// Complex frequency response of a cascade at `freq_hz`.
std::complex<double> frequency_response(const std::vector<Biquad>& sections,
                                        double freq_hz, double sample_rate);

std::vector<Biquad> design_notch(double center_hz, double q, double sample_rate);

/// Digital Butterworth bandpass of prototype order `order` (2*order poles,
/// `order` sections), bilinear transform with prewarped edges, unity gain at
/// the geometric band center.
std::vector<Biquad> design_butter_bandpass(int order, double low_hz, double high_hz,
                                           double sample_rate);

/// Cascade with independent state per channel. One instance serves one stream.
class SosFilter {
 public:
  SosFilter(std::vector<Biquad> sections, Index channels);

  /// Filters `block` (time x channel) in place, continuing from the current state.
  void process(Eigen::Ref<Eigen::MatrixXd> block);
  void reset();

  Index channels() const { return channels_; }
  const std::vector<Biquad>& sections() const { return sections_; }

 private:
  std::vector<Biquad> sections_;
  Index channels_;
  // state_(2*s, c), state_(2*s+1, c): delay registers of section s, channel c
  Eigen::MatrixXd state_;
};

RawEmg notch_filter(const RawEmg& x, const FilterSpec& spec);
RawEmg bandpass_filter(const RawEmg& x, const FilterSpec& spec);
/// Notch followed by bandpass.
RawEmg filter_chain(const RawEmg& x, const FilterSpec& spec);

/// Streaming equivalent of filter_chain.
class FilterChain {
 public:
  FilterChain(const FilterSpec& spec, double sample_rate, Index channels);
  void process(Eigen::Ref<Eigen::MatrixXd> block);
  void reset();

 private:
  SosFilter notch_;
  SosFilter bandpass_;
};

struct RmsFrames {
  Eigen::MatrixXd values;          // frames x channels
  std::vector<Index> start_sample;  // first sample of each window
  double sample_rate = 2000.0;
  Index window_samples = 400;
  Index hop_samples = 100;
  /// Set when the input was shorter than one window (values is then empty).
  bool insufficient_samples = false;

  Index frame_count() const { return values.rows(); }
  /// Time of the window end, in seconds from the first sample.
  double timestamp(Index frame) const;
};

/// frame count = floor((n - window) / hop) + 1 when n >= window, else 0.
Index rms_frame_count(Index samples, const RmsSpec& spec);

Eigen::MatrixXd rms_frames(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                           const RmsSpec& spec);
RmsFrames rms_frames(const RawEmg& x, const RmsSpec& spec);

struct ChannelExtrema {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  Index channels() const { return min.size(); }
  std::vector<Index> degenerate_channels() const;
};

ChannelExtrema fit_extrema(const Eigen::Ref<const Eigen::MatrixXd>& frames);

/// (v - min) / (max - min) per channel. Degenerate channels map to 0 and emit
/// a warning. Values are not clamped, so frames from another session may fall
/// outside [0, 1].
Eigen::MatrixXd apply_minmax(const Eigen::Ref<const Eigen::MatrixXd>& frames,
                             const ChannelExtrema& extrema);

}  // namespace myo::signal
