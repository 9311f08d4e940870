#include "myo/pipeline.hpp"

#include "myo/error.hpp"

namespace myo {

PreprocessResult preprocess_session(const data::DeltaSession& session,
                                    const signal::FilterSpec& filter,
                                    const signal::RmsSpec& rms) {
  session.validate();
  filter.validate(session.meta.sample_rate);
  rms.validate();

  Eigen::MatrixXd stream = session.samples;
  signal::FilterChain chain(filter, session.meta.sample_rate, session.meta.channels);
  chain.process(stream);

  const auto blocks = session.repetition_blocks();
  const Eigen::Index per_rep = signal::rms_frame_count(session.meta.samples_per_rep, rms);
  if (per_rep == 0)
    warn("repetitions are shorter than one RMS window; session yields no frames");

  PreprocessResult out;
  out.frames_per_repetition = per_rep;
  auto& fs = out.frames;
  fs.subject = session.meta.subject;
  fs.day = session.meta.day;
  fs.classes = session.meta.classes;
  fs.repetitions = session.meta.repetitions;
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(blocks.size()) * per_rep, session.meta.channels);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    raw.middleRows(at, per_rep) = signal::rms_frames(stream.middleRows(b.start, b.length), rms);
    for (Eigen::Index f = 0; f < per_rep; ++f) {
      fs.labels.push_back(b.label);
      fs.repetition.push_back(b.repetition);
    }
    at += per_rep;
  }
  if (raw.rows() == 0) {
    fs.frames = raw;
    return out;
  }
  out.extrema = signal::fit_extrema(raw);
  fs.frames = signal::apply_minmax(raw, out.extrema);
  return out;
}

}  // namespace myo
