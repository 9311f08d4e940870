#pragma once

// Session recordings, preprocessed frame sets, and the repetition-level
// train/update/test splits used by the evaluation protocols.
//
// On disk a session is a headerless CSV of `channels + 1` columns (samples
// then an integer class label) plus a `<file>.meta` key=value sidecar
// (subject, day, sample_rate, channels, classes, repetitions,
// samples_per_rep). Rows are grouped into contiguous repetition blocks of
// `samples_per_rep` samples; the block order is free, the label inside a block
// is constant.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "myo/kv_config.hpp"

namespace myo::data {

using Eigen::Index;

inline constexpr std::array<std::string_view, 7> kGestureNames{
    "Rest", "HC", "HO", "WP", "WS", "WF", "WE"};

struct SessionMeta {
  int subject = 1;
  int day = 1;
  double sample_rate = 2000.0;
  Index channels = 64;
  Index classes = 7;
  Index repetitions = 10;
  Index samples_per_rep = 4000;  // 2 s at 2 kHz

  /// classes * repetitions * samples_per_rep (280000 for the defaults).
  Index expected_rows() const { return classes * repetitions * samples_per_rep; }
  void validate() const;

  KeyValues to_config() const;
  static SessionMeta from_config(const KeyValues& kv);
};

struct RepetitionBlock {
  Index start = 0;   // first row
  Index length = 0;  // samples_per_rep
  int label = 0;
  int repetition = 0;  // 0-based index among blocks of the same class
};

struct DeltaSession {
  SessionMeta meta;
  Eigen::MatrixXd samples;  // rows x channels
  std::vector<int> labels;  // one per row

  Index rows() const { return samples.rows(); }
  /// Throws ParseError (with the offending row) when layout invariants fail.
  void validate() const;
  std::vector<RepetitionBlock> repetition_blocks() const;
};

std::string sidecar_path(const std::string& path);

using SessionDecoder = std::function<DeltaSession(const std::string& path)>;

/// CSV + sidecar decoder. A missing sidecar means the defaults above.
DeltaSession decode_csv_session(const std::string& path);
DeltaSession load_session(const std::string& path,
                          const SessionDecoder& decoder = decode_csv_session);
/// Canonical CSV (shortest round-trip numbers, '\n' endings) plus sidecar.
void write_session(const std::string& path, const DeltaSession& session);
std::string format_session_csv(const DeltaSession& session);
DeltaSession parse_session_csv(std::string_view text, const SessionMeta& meta);

/// Preprocessed frames of one session; each frame remembers its class and
/// repetition so splits can be made at repetition level.
struct FrameSession {
  int subject = 1;
  int day = 1;
  Index classes = 7;
  Index repetitions = 10;
  Eigen::MatrixXd frames;        // n x d
  std::vector<int> labels;       // n
  std::vector<int> repetition;   // n, repetition index within its class

  Index size() const { return frames.rows(); }
  Index dim() const { return frames.cols(); }
  void validate() const;
};

/// Frame files: headerless CSV with d feature columns, label, repetition;
/// sidecar `<file>.meta` with subject, day, classes, repetitions, dim.
void write_frames(const std::string& path, const FrameSession& frames);
FrameSession load_frames(const std::string& path);

struct LabeledSet {
  Eigen::MatrixXd X;
  std::vector<int> labels;
  Index classes = 7;
  std::vector<Index> rows;  // source row of each sample in its FrameSession

  Index size() const { return X.rows(); }
  Eigen::MatrixXd one_hot() const;
};

LabeledSet subset(const FrameSession& session, std::span<const Index> rows);
LabeledSet concatenate(std::span<const LabeledSet> sets);

enum class Setting { batch, incremental };
std::string_view to_string(Setting s);
Setting parse_setting(std::string_view s);

enum class SplitRole { train, update, test };

/// Repetition-to-role assignment. Position 0 is the first day of the order:
/// `train_reps` train, the rest test. Later days test on everything in the
/// batch setting; in the incremental setting `update_reps` update and the rest
/// test.
struct SplitPlan {
  Setting setting = Setting::batch;
  std::vector<int> train_reps{0, 1};
  std::vector<int> update_reps{0, 1};

  static SplitPlan batch() { return {Setting::batch, {0, 1}, {0, 1}}; }
  static SplitPlan incremental() { return {Setting::incremental, {0, 1}, {0, 1}}; }

  SplitRole role(Index day_position, int repetition) const;
};

struct DaySplit {
  LabeledSet train;
  LabeledSet update;
  LabeledSet test;
};

DaySplit make_split(const FrameSession& session, const SplitPlan& plan, Index day_position);
std::vector<DaySplit> make_splits(std::span<const FrameSession> ordered_sessions,
                                  const SplitPlan& plan);

/// All orderings of `days`, lexicographic in the order given.
std::vector<std::vector<int>> enumerate_day_orders(std::span<const int> days);
std::uint64_t permutation_count(std::size_t n);
/// At most `cap` distinct orderings: the given (chronological) order first,
/// then seeded random ones. cap >= n! returns every ordering.
std::vector<std::vector<int>> sample_day_orders(std::span<const int> days, std::size_t cap,
                                                std::uint64_t seed);

}  // namespace myo::data
