#include "myo/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "myo/error.hpp"

namespace myo::signal {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

void require_finite_positive(double v, const char* name) {
  if (!(std::isfinite(v) && v > 0))
    throw InvalidArgument(std::string(name) + " must be finite and > 0");
}

cd section_response(const Biquad& s, cd zinv) {
  const cd num = s.b0 + zinv * (s.b1 + zinv * s.b2);
  const cd den = 1.0 + zinv * (s.a1 + zinv * s.a2);
  return num / den;
}

cd bilinear(cd s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

}  // namespace

void RawEmg::validate() const {
  require_finite_positive(sample_rate, "sample_rate");
  if (samples.cols() < 1) throw InvalidArgument("EMG needs at least one channel");
}

void FilterSpec::validate(double sample_rate) const {
  require_finite_positive(sample_rate, "sample_rate");
  const double nyquist = sample_rate / 2.0;
  require_finite_positive(notch_hz, "notch_hz");
  require_finite_positive(notch_q, "notch_q");
  require_finite_positive(band_low_hz, "band_low_hz");
  require_finite_positive(band_high_hz, "band_high_hz");
  if (notch_hz >= nyquist) throw InvalidArgument("notch_hz must be below Nyquist");
  if (band_low_hz >= band_high_hz)
    throw InvalidArgument("band_low_hz must be below band_high_hz");
  if (band_high_hz >= nyquist)
    throw InvalidArgument("band_high_hz must be below Nyquist");
  if (butter_order < 1) throw InvalidArgument("butter_order must be >= 1");
}

KeyValues FilterSpec::to_config() const {
  KeyValues kv;
  kv.set("notch_hz", notch_hz);
  kv.set("notch_q", notch_q);
  kv.set("band_low_hz", band_low_hz);
  kv.set("band_high_hz", band_high_hz);
  kv.set("butter_order", butter_order);
  return kv;
}

FilterSpec FilterSpec::from_config(const KeyValues& kv) {
  FilterSpec s;
  s.notch_hz = kv.get_double("notch_hz", s.notch_hz);
  s.notch_q = kv.get_double("notch_q", s.notch_q);
  s.band_low_hz = kv.get_double("band_low_hz", s.band_low_hz);
  s.band_high_hz = kv.get_double("band_high_hz", s.band_high_hz);
  s.butter_order = static_cast<int>(kv.get_int("butter_order", s.butter_order));
  return s;
}

void RmsSpec::validate() const {
  if (window_samples < 1) throw InvalidArgument("window_samples must be >= 1");
  if (hop_samples < 1 || hop_samples > window_samples)
    throw InvalidArgument("hop_samples must be in [1, window_samples]");
}

KeyValues RmsSpec::to_config() const {
  KeyValues kv;
  kv.set("window_samples", static_cast<long long>(window_samples));
  kv.set("hop_samples", static_cast<long long>(hop_samples));
  return kv;
}

RmsSpec RmsSpec::from_config(const KeyValues& kv) {
  RmsSpec s;
  s.window_samples = kv.get_int("window_samples", s.window_samples);
  s.hop_samples = kv.get_int("hop_samples", s.hop_samples);
  return s;
}

std::complex<double> frequency_response(const std::vector<Biquad>& sections,
                                        double freq_hz, double sample_rate) {
  const cd zinv = std::polar(1.0, -2.0 * kPi * freq_hz / sample_rate);
  cd h = 1.0;
  for (const auto& s : sections) h *= section_response(s, zinv);
  return h;
}

std::vector<Biquad> design_notch(double center_hz, double q, double sample_rate) {
  const double w0 = 2.0 * kPi * center_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * std::cos(w0) / a0;
  s.a2 = (1.0 - alpha) / a0;
  return {s};
}

std::vector<Biquad> design_butter_bandpass(int order, double low_hz, double high_hz,
                                           double sample_rate) {
  if (order < 1) throw InvalidArgument("butter_order must be >= 1");
  if (!(0 < low_hz && low_hz < high_hz && high_hz < sample_rate / 2))
    throw InvalidArgument("bandpass edges must satisfy 0 < low < high < Nyquist");

  const double fs = sample_rate;
  const double wl = 2.0 * fs * std::tan(kPi * low_hz / fs);
  const double wh = 2.0 * fs * std::tan(kPi * high_hz / fs);
  const double bw = wh - wl;
  const double w0sq = wl * wh;

  std::vector<cd> complex_poles;
  std::vector<double> real_poles;
  for (int k = 1; k <= order; ++k) {
    const cd p = std::polar(1.0, kPi * (2.0 * k + order - 1) / (2.0 * order));
    const cd pb = p * bw;
    const cd disc = std::sqrt(pb * pb - 4.0 * w0sq);
    for (const cd s : {(pb + disc) / 2.0, (pb - disc) / 2.0}) {
      const cd z = bilinear(s, fs);
      if (std::abs(z.imag()) <= 1e-12 * std::abs(z))
        real_poles.push_back(z.real());
      else if (z.imag() > 0)
        complex_poles.push_back(z);
    }
  }
  std::sort(real_poles.begin(), real_poles.end());

  std::vector<Biquad> sections;
  for (const cd z : complex_poles) {
    Biquad s;
    s.b0 = 1.0, s.b1 = 0.0, s.b2 = -1.0;
    s.a1 = -2.0 * z.real();
    s.a2 = std::norm(z);
    sections.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    Biquad s;
    s.b0 = 1.0, s.b1 = 0.0, s.b2 = -1.0;
    s.a1 = -(real_poles[i] + real_poles[i + 1]);
    s.a2 = real_poles[i] * real_poles[i + 1];
    sections.push_back(s);
  }
  if (static_cast<int>(sections.size()) != order)
    throw NumericalError("bandpass design produced an unexpected section count");

  // Unity magnitude at the digital image of the analog center frequency.
  const double center_hz = fs / kPi * std::atan(std::sqrt(w0sq) / (2.0 * fs));
  const cd zinv = std::polar(1.0, -2.0 * kPi * center_hz / fs);
  for (auto& s : sections) {
    const double g = 1.0 / std::abs(section_response(s, zinv));
    s.b0 *= g;
    s.b1 *= g;
    s.b2 *= g;
  }
  return sections;
}

SosFilter::SosFilter(std::vector<Biquad> sections, Index channels)
    : sections_(std::move(sections)), channels_(channels),
      state_(Eigen::MatrixXd::Zero(2 * static_cast<Index>(sections_.size()), channels)) {
  if (channels < 1) throw InvalidArgument("filter needs at least one channel");
}

void SosFilter::process(Eigen::Ref<Eigen::MatrixXd> block) {
  if (block.cols() != channels_)
    throw DimensionError("filter channel count mismatch: expected " +
                         std::to_string(channels_) + ", got " +
                         std::to_string(block.cols()));
  const Index n = block.rows();
  for (Index c = 0; c < channels_; ++c) {
    double* col = block.col(c).data();
    for (std::size_t si = 0; si < sections_.size(); ++si) {
      const Biquad& s = sections_[si];
      double z1 = state_(2 * si, c);
      double z2 = state_(2 * si + 1, c);
      for (Index t = 0; t < n; ++t) {
        const double x = col[t];
        const double y = s.b0 * x + z1;
        z1 = s.b1 * x - s.a1 * y + z2;
        z2 = s.b2 * x - s.a2 * y;
        col[t] = y;
      }
      state_(2 * si, c) = z1;
      state_(2 * si + 1, c) = z2;
    }
  }
}

void SosFilter::reset() { state_.setZero(); }

RawEmg notch_filter(const RawEmg& x, const FilterSpec& spec) {
  x.validate();
  spec.validate(x.sample_rate);
  RawEmg out = x;
  SosFilter f(design_notch(spec.notch_hz, spec.notch_q, x.sample_rate), x.channel_count());
  f.process(out.samples);
  return out;
}

RawEmg bandpass_filter(const RawEmg& x, const FilterSpec& spec) {
  x.validate();
  spec.validate(x.sample_rate);
  RawEmg out = x;
  SosFilter f(design_butter_bandpass(spec.butter_order, spec.band_low_hz,
                                     spec.band_high_hz, x.sample_rate),
              x.channel_count());
  f.process(out.samples);
  return out;
}

RawEmg filter_chain(const RawEmg& x, const FilterSpec& spec) {
  x.validate();
  RawEmg out = x;
  FilterChain chain(spec, x.sample_rate, x.channel_count());
  chain.process(out.samples);
  return out;
}

FilterChain::FilterChain(const FilterSpec& spec, double sample_rate, Index channels)
    : notch_((spec.validate(sample_rate),
              design_notch(spec.notch_hz, spec.notch_q, sample_rate)),
             channels),
      bandpass_(design_butter_bandpass(spec.butter_order, spec.band_low_hz,
                                       spec.band_high_hz, sample_rate),
                channels) {}

void FilterChain::process(Eigen::Ref<Eigen::MatrixXd> block) {
  notch_.process(block);
  bandpass_.process(block);
}

void FilterChain::reset() {
  notch_.reset();
  bandpass_.reset();
}

double RmsFrames::timestamp(Index frame) const {
  return static_cast<double>(start_sample.at(static_cast<std::size_t>(frame)) +
                             window_samples) /
         sample_rate;
}

Index rms_frame_count(Index samples, const RmsSpec& spec) {
  spec.validate();
  if (samples < spec.window_samples) return 0;
  return (samples - spec.window_samples) / spec.hop_samples + 1;
}

Eigen::MatrixXd rms_frames(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                           const RmsSpec& spec) {
  const Index frames = rms_frame_count(samples.rows(), spec);
  const Index channels = samples.cols();
  Eigen::MatrixXd out(frames, channels);
  const double inv_n = 1.0 / static_cast<double>(spec.window_samples);
  for (Index c = 0; c < channels; ++c) {
    for (Index f = 0; f < frames; ++f) {
      const double ss = samples.col(c).segment(f * spec.hop_samples, spec.window_samples)
                            .squaredNorm();
      out(f, c) = std::sqrt(ss * inv_n);
    }
  }
  return out;
}

RmsFrames rms_frames(const RawEmg& x, const RmsSpec& spec) {
  x.validate();
  RmsFrames out;
  out.values = rms_frames(x.samples, spec);
  out.sample_rate = x.sample_rate;
  out.window_samples = spec.window_samples;
  out.hop_samples = spec.hop_samples;
  out.insufficient_samples = out.values.rows() == 0;
  out.start_sample.resize(static_cast<std::size_t>(out.values.rows()));
  for (Index f = 0; f < out.values.rows(); ++f)
    out.start_sample[static_cast<std::size_t>(f)] = f * spec.hop_samples;
  return out;
}

std::vector<Index> ChannelExtrema::degenerate_channels() const {
  std::vector<Index> out;
  for (Index c = 0; c < min.size(); ++c)
    if (!(max(c) > min(c))) out.push_back(c);
  return out;
}

ChannelExtrema fit_extrema(const Eigen::Ref<const Eigen::MatrixXd>& frames) {
  if (frames.rows() < 1) throw InvalidArgument("fit_extrema needs at least one frame");
  if (!frames.allFinite()) throw NumericalError("fit_extrema: non-finite frame values");
  ChannelExtrema e;
  e.min = frames.colwise().minCoeff().transpose();
  e.max = frames.colwise().maxCoeff().transpose();
  return e;
}

Eigen::MatrixXd apply_minmax(const Eigen::Ref<const Eigen::MatrixXd>& frames,
                             const ChannelExtrema& extrema) {
  if (frames.cols() != extrema.channels())
    throw DimensionError("apply_minmax: channel count mismatch");
  Eigen::MatrixXd out(frames.rows(), frames.cols());
  const auto degenerate = extrema.degenerate_channels();
  for (Index c = 0; c < frames.cols(); ++c) {
    const double range = extrema.max(c) - extrema.min(c);
    if (range > 0)
      out.col(c) = (frames.col(c).array() - extrema.min(c)) / range;
    else
      out.col(c).setZero();
  }
  if (!degenerate.empty()) {
    std::string msg = "min-max normalization: " + std::to_string(degenerate.size()) +
                      " constant channel(s) mapped to 0 (first: " +
                      std::to_string(degenerate.front()) + ")";
    warn(msg);
  }
  return out;
}

}  // namespace myo::signal
