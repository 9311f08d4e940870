#include "myo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "myo/error.hpp"
#include "myo/rng.hpp"
#include "myo/text_format.hpp"

namespace myo::data {

namespace {

// Parses one comma-separated line into `out`; returns the column count or
// throws ParseError for a malformed number.
std::size_t parse_row(std::string_view line, std::vector<double>& out, std::size_t row) {
  out.clear();
  const char* p = line.data();
  const char* end = p + line.size();
  while (true) {
    const char* comma = std::find(p, end, ',');
    std::string_view field(p, static_cast<std::size_t>(comma - p));
    double v = 0;
    if (!text::parse_double(field, v))
      throw ParseError("malformed number '" + std::string(field) + "' in column " +
                           std::to_string(out.size()),
                       row);
    out.push_back(v);
    if (comma == end) break;
    p = comma + 1;
  }
  return out.size();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line, row++);
    pos = nl + 1;
  }
}

int integer_label(double v, Index classes, std::size_t row) {
  if (!(std::floor(v) == v) || v < 0 || v >= static_cast<double>(classes))
    throw ParseError("label " + text::format_double(v) + " outside [0, " +
                         std::to_string(classes) + ")",
                     row);
  return static_cast<int>(v);
}

KeyValues load_sidecar_or_empty(const std::string& path) {
  const auto meta = sidecar_path(path);
  if (!std::filesystem::exists(meta)) return {};
  return KeyValues::load(meta);
}

}  // namespace

void SessionMeta::validate() const {
  if (!(sample_rate > 0)) throw InvalidArgument("session sample_rate must be > 0");
  if (channels < 1 || classes < 1 || repetitions < 1 || samples_per_rep < 1)
    throw InvalidArgument("session channels/classes/repetitions/samples_per_rep must be >= 1");
}

KeyValues SessionMeta::to_config() const {
  KeyValues kv;
  kv.set("subject", subject);
  kv.set("day", day);
  kv.set("sample_rate", sample_rate);
  kv.set("channels", static_cast<long long>(channels));
  kv.set("classes", static_cast<long long>(classes));
  kv.set("repetitions", static_cast<long long>(repetitions));
  kv.set("samples_per_rep", static_cast<long long>(samples_per_rep));
  return kv;
}

SessionMeta SessionMeta::from_config(const KeyValues& kv) {
  SessionMeta m;
  m.subject = static_cast<int>(kv.get_int("subject", m.subject));
  m.day = static_cast<int>(kv.get_int("day", m.day));
  m.sample_rate = kv.get_double("sample_rate", m.sample_rate);
  m.channels = kv.get_int("channels", m.channels);
  m.classes = kv.get_int("classes", m.classes);
  m.repetitions = kv.get_int("repetitions", m.repetitions);
  m.samples_per_rep = kv.get_int("samples_per_rep", m.samples_per_rep);
  m.validate();
  return m;
}

void DeltaSession::validate() const {
  meta.validate();
  if (samples.cols() != meta.channels)
    throw ParseError("expected " + std::to_string(meta.channels) + " channel columns, got " +
                     std::to_string(samples.cols()));
  if (static_cast<Index>(labels.size()) != samples.rows())
    throw ParseError("label count does not match sample rows");
  if (rows() != meta.expected_rows())
    throw ParseError("truncated session: expected " + std::to_string(meta.expected_rows()) +
                         " rows, got " + std::to_string(rows()),
                     static_cast<std::size_t>(rows()));
  for (std::size_t r = 0; r < labels.size(); ++r)
    if (labels[r] < 0 || labels[r] >= meta.classes)
      throw ParseError("label " + std::to_string(labels[r]) + " outside [0, " +
                           std::to_string(meta.classes) + ")",
                       r);
  std::vector<Index> per_class(static_cast<std::size_t>(meta.classes), 0);
  for (Index b = 0; b < rows() / meta.samples_per_rep; ++b) {
    const Index start = b * meta.samples_per_rep;
    const int y = labels[static_cast<std::size_t>(start)];
    for (Index r = start; r < start + meta.samples_per_rep; ++r)
      if (labels[static_cast<std::size_t>(r)] != y)
        throw ParseError("label changes inside a repetition block", static_cast<std::size_t>(r));
    ++per_class[static_cast<std::size_t>(y)];
  }
  for (Index c = 0; c < meta.classes; ++c)
    if (per_class[static_cast<std::size_t>(c)] != meta.repetitions)
      throw ParseError("class " + std::to_string(c) + " has " +
                       std::to_string(per_class[static_cast<std::size_t>(c)]) +
                       " repetition blocks, expected " + std::to_string(meta.repetitions));
  if (!samples.allFinite()) throw ParseError("non-finite sample values");
}

std::vector<RepetitionBlock> DeltaSession::repetition_blocks() const {
  std::vector<RepetitionBlock> blocks;
  std::vector<int> seen(static_cast<std::size_t>(meta.classes), 0);
  for (Index start = 0; start + meta.samples_per_rep <= rows(); start += meta.samples_per_rep) {
    RepetitionBlock b;
    b.start = start;
    b.length = meta.samples_per_rep;
    b.label = labels[static_cast<std::size_t>(start)];
    b.repetition = seen[static_cast<std::size_t>(b.label)]++;
    blocks.push_back(b);
  }
  return blocks;
}

std::string sidecar_path(const std::string& path) { return path + ".meta"; }

DeltaSession parse_session_csv(std::string_view text, const SessionMeta& meta) {
  meta.validate();
  const auto width = static_cast<std::size_t>(meta.channels + 1);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(meta.expected_rows()) * width);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(meta.expected_rows()));
  std::vector<double> row;
  row.reserve(width);
  bool seen_blank = false;
  for_each_line(text, [&](std::string_view line, std::size_t r) {
    if (line.empty()) {
      seen_blank = true;
      return;
    }
    if (seen_blank) throw ParseError("blank line inside data", r - 1);
    const auto cols = parse_row(line, row, labels.size());
    if (cols != width)
      throw ParseError("expected " + std::to_string(width) + " columns, got " +
                           std::to_string(cols),
                       labels.size());
    values.insert(values.end(), row.begin(), row.end() - 1);
    labels.push_back(integer_label(row.back(), meta.classes, labels.size()));
  });

  DeltaSession s;
  s.meta = meta;
  const auto n = static_cast<Index>(labels.size());
  s.samples = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                             Eigen::RowMajor>>(values.data(), n, meta.channels);
  s.labels = std::move(labels);
  s.validate();
  return s;
}

DeltaSession decode_csv_session(const std::string& path) {
  const auto meta = SessionMeta::from_config(load_sidecar_or_empty(path));
  return parse_session_csv(text::read_file(path), meta);
}

DeltaSession load_session(const std::string& path, const SessionDecoder& decoder) {
  if (!std::filesystem::exists(path)) throw IoError("session file '" + path + "' not found");
  return decoder(path);
}

std::string format_session_csv(const DeltaSession& session) {
  std::string out;
  out.reserve(static_cast<std::size_t>(session.rows() * (session.meta.channels + 1) * 6));
  for (Index r = 0; r < session.rows(); ++r) {
    for (Index c = 0; c < session.samples.cols(); ++c) {
      text::append_double(out, session.samples(r, c));
      out += ',';
    }
    text::append_int(out, session.labels[static_cast<std::size_t>(r)]);
    out += '\n';
  }
  return out;
}

void write_session(const std::string& path, const DeltaSession& session) {
  session.validate();
  text::write_file(path, format_session_csv(session));
  session.meta.to_config().save(sidecar_path(path));
}

void FrameSession::validate() const {
  if (classes < 1 || repetitions < 1)
    throw InvalidArgument("frame session: classes and repetitions must be >= 1");
  const auto n = static_cast<std::size_t>(frames.rows());
  if (labels.size() != n || repetition.size() != n)
    throw DimensionError("frame session: label/repetition count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw InvalidArgument("frame session: label out of range at row " + std::to_string(i));
    if (repetition[i] < 0 || repetition[i] >= repetitions)
      throw InvalidArgument("frame session: repetition out of range at row " +
                            std::to_string(i));
  }
}

void write_frames(const std::string& path, const FrameSession& fs) {
  fs.validate();
  std::string out;
  for (Index r = 0; r < fs.size(); ++r) {
    for (Index c = 0; c < fs.dim(); ++c) {
      text::append_double(out, fs.frames(r, c));
      out += ',';
    }
    text::append_int(out, fs.labels[static_cast<std::size_t>(r)]);
    out += ',';
    text::append_int(out, fs.repetition[static_cast<std::size_t>(r)]);
    out += '\n';
  }
  text::write_file(path, out);
  KeyValues kv;
  kv.set("subject", fs.subject);
  kv.set("day", fs.day);
  kv.set("classes", static_cast<long long>(fs.classes));
  kv.set("repetitions", static_cast<long long>(fs.repetitions));
  kv.set("dim", static_cast<long long>(fs.dim()));
  kv.save(sidecar_path(path));
}

FrameSession load_frames(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("frame file '" + path + "' not found");
  const auto kv = load_sidecar_or_empty(path);
  FrameSession fs;
  fs.subject = static_cast<int>(kv.get_int("subject", 1));
  fs.day = static_cast<int>(kv.get_int("day", 1));
  fs.classes = kv.get_int("classes", 7);
  fs.repetitions = kv.get_int("repetitions", 10);
  long long dim = kv.get_int("dim", -1);

  std::vector<double> values;
  std::vector<double> row;
  const auto text = text::read_file(path);
  for_each_line(text, [&](std::string_view line, std::size_t) {
    if (line.empty()) return;
    const auto r = fs.labels.size();
    const auto cols = static_cast<long long>(parse_row(line, row, r));
    if (dim < 0) dim = cols - 2;
    if (cols != dim + 2 || dim < 1)
      throw ParseError("expected " + std::to_string(dim + 2) + " columns, got " +
                           std::to_string(cols),
                       r);
    values.insert(values.end(), row.begin(), row.end() - 2);
    fs.labels.push_back(integer_label(row[row.size() - 2], fs.classes, r));
    fs.repetition.push_back(integer_label(row.back(), fs.repetitions, r));
  });
  if (dim < 1) throw ParseError("frame file '" + path + "' has no rows");
  fs.frames = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(
      values.data(), static_cast<Index>(fs.labels.size()), dim);
  fs.validate();
  return fs;
}

Eigen::MatrixXd LabeledSet::one_hot() const {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(size(), classes);
  for (Index i = 0; i < size(); ++i) Y(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  return Y;
}

LabeledSet subset(const FrameSession& session, std::span<const Index> rows) {
  LabeledSet s;
  s.classes = session.classes;
  s.X.resize(static_cast<Index>(rows.size()), session.dim());
  s.labels.reserve(rows.size());
  s.rows.assign(rows.begin(), rows.end());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.X.row(static_cast<Index>(i)) = session.frames.row(rows[i]);
    s.labels.push_back(session.labels[static_cast<std::size_t>(rows[i])]);
  }
  return s;
}

LabeledSet concatenate(std::span<const LabeledSet> sets) {
  LabeledSet out;
  Index n = 0, d = -1;
  for (const auto& s : sets) {
    n += s.size();
    if (s.size() > 0) {
      if (d >= 0 && d != s.X.cols()) throw DimensionError("concatenate: dimension mismatch");
      d = s.X.cols();
      out.classes = s.classes;
    }
  }
  out.X.resize(n, std::max<Index>(d, 0));
  Index at = 0;
  for (const auto& s : sets) {
    if (s.size() == 0) continue;
    out.X.middleRows(at, s.size()) = s.X;
    out.labels.insert(out.labels.end(), s.labels.begin(), s.labels.end());
    out.rows.insert(out.rows.end(), s.rows.begin(), s.rows.end());
    at += s.size();
  }
  return out;
}

std::string_view to_string(Setting s) {
  return s == Setting::batch ? "batch" : "incremental";
}

Setting parse_setting(std::string_view s) {
  if (s == "batch") return Setting::batch;
  if (s == "incremental") return Setting::incremental;
  throw InvalidArgument("unknown setting '" + std::string(s) +
                        "' (expected batch or incremental)");
}

SplitRole SplitPlan::role(Index day_position, int repetition) const {
  auto has = [repetition](const std::vector<int>& reps) {
    return std::find(reps.begin(), reps.end(), repetition) != reps.end();
  };
  if (day_position == 0) return has(train_reps) ? SplitRole::train : SplitRole::test;
  if (setting == Setting::incremental && has(update_reps)) return SplitRole::update;
  return SplitRole::test;
}

DaySplit make_split(const FrameSession& session, const SplitPlan& plan, Index day_position) {
  session.validate();
  std::vector<Index> train, update, test;
  for (Index i = 0; i < session.size(); ++i) {
    switch (plan.role(day_position, session.repetition[static_cast<std::size_t>(i)])) {
      case SplitRole::train: train.push_back(i); break;
      case SplitRole::update: update.push_back(i); break;
      case SplitRole::test: test.push_back(i); break;
    }
  }
  return {subset(session, train), subset(session, update), subset(session, test)};
}

std::vector<DaySplit> make_splits(std::span<const FrameSession> ordered_sessions,
                                  const SplitPlan& plan) {
  std::vector<DaySplit> out;
  for (std::size_t p = 0; p < ordered_sessions.size(); ++p)
    out.push_back(make_split(ordered_sessions[p], plan, static_cast<Index>(p)));
  return out;
}

std::uint64_t permutation_count(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

std::vector<std::vector<int>> enumerate_day_orders(std::span<const int> days) {
  if (days.size() > 10) throw InvalidArgument("refusing to enumerate more than 10! orderings");
  std::vector<std::size_t> idx(days.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<std::vector<int>> out;
  do {
    std::vector<int> order;
    for (auto i : idx) order.push_back(days[i]);
    out.push_back(std::move(order));
  } while (std::next_permutation(idx.begin(), idx.end()));
  return out;
}

std::vector<std::vector<int>> sample_day_orders(std::span<const int> days, std::size_t cap,
                                                std::uint64_t seed) {
  if (cap == 0) return {};
  if (days.size() <= 10 && cap >= permutation_count(days.size()))
    return enumerate_day_orders(days);
  std::vector<int> base(days.begin(), days.end());
  std::vector<std::vector<int>> out{base};
  std::set<std::vector<int>> seen{base};
  Rng rng(seed);
  while (out.size() < cap) {
    auto cand = base;
    std::shuffle(cand.begin(), cand.end(), rng);
    if (seen.insert(cand).second) out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace myo::data
