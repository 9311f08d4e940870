#pragma once

#include "myo/dataset.hpp"
#include "myo/signal.hpp"

namespace myo {

struct PreprocessResult {
  data::FrameSession frames;
  signal::ChannelExtrema extrema;
  Eigen::Index frames_per_repetition = 0;
};

/// Session -> normalized RMS frames.
///
/// The whole recording is filtered as one causal stream (state reset at the
/// session start). RMS windows never straddle repetition blocks. Min-max
/// extrema are fitted on every frame of the session and applied to all of
/// them.
PreprocessResult preprocess_session(const data::DeltaSession& session,
                                    const signal::FilterSpec& filter = {},
                                    const signal::RmsSpec& rms = {});

}  // namespace myo
