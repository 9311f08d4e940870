#include <doctest.h>

#include <filesystem>
#include <set>

#include "myo/error.hpp"
#include "myo/pipeline.hpp"
#include "myo/synthetic.hpp"
#include "myo/text_format.hpp"
#include "test_util.hpp"

using namespace myo;
using namespace myo::data;
using Eigen::Index;

namespace {

SessionMeta tiny_meta() {
  SessionMeta m;
  m.channels = 3;
  m.classes = 2;
  m.repetitions = 2;
  m.samples_per_rep = 5;
  return m;
}

// Blocks in order class 0, class 1, class 0, class 1.
std::string tiny_csv() {
  std::string out;
  for (int b = 0; b < 4; ++b)
    for (int t = 0; t < 5; ++t)
      out += std::to_string(b) + "," + std::to_string(t) + ",-" + std::to_string(t) + "," +
             std::to_string(b % 2) + "\n";
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("myo_dataset_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

FrameSession frame_session(Index classes, Index reps, Index per_rep, Index dim, int day = 1) {
  FrameSession s;
  s.day = day;
  s.classes = classes;
  s.repetitions = reps;
  s.frames = testutil::gaussian(classes * reps * per_rep, dim, static_cast<std::uint64_t>(day));
  for (Index c = 0; c < classes; ++c)
    for (Index r = 0; r < reps; ++r)
      for (Index f = 0; f < per_rep; ++f) {
        s.labels.push_back(static_cast<int>(c));
        s.repetition.push_back(static_cast<int>(r));
      }
  return s;
}

}  // namespace

TEST_CASE("default session layout") {
  const SessionMeta m;
  CHECK(m.expected_rows() == 280000);
  CHECK(m.channels == 64);
  CHECK(m.classes == 7);
  CHECK(kGestureNames[0] == "Rest");
  CHECK(kGestureNames.size() == 7);
}

TEST_CASE("parse a well-formed session and find its repetition blocks") {
  const DeltaSession s = parse_session_csv(tiny_csv(), tiny_meta());
  CHECK(s.rows() == 20);
  CHECK(s.samples(7, 0) == 1.0);
  CHECK(s.samples(7, 2) == -2.0);
  const auto blocks = s.repetition_blocks();
  REQUIRE(blocks.size() == 4);
  CHECK(blocks[2].start == 10);
  CHECK(blocks[2].label == 0);
  CHECK(blocks[2].repetition == 1);
  CHECK(blocks[3].repetition == 1);
}

TEST_CASE("malformed sessions are rejected with the offending row") {
  std::string text = tiny_csv();

  SUBCASE("wrong column count") {
    auto bad = text;
    const auto pos = bad.find('\n', 30);
    bad.insert(pos, ",9");
    try {
      parse_session_csv(bad, tiny_meta());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() != ParseError::npos);
    }
  }
  SUBCASE("label out of range") {
    auto bad = text;
    bad[bad.size() - 2] = '5';
    try {
      parse_session_csv(bad, tiny_meta());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 19);
    }
  }
  SUBCASE("label changing inside a block") {
    auto s = parse_session_csv(text, tiny_meta());
    s.labels[3] = 1;
    try {
      s.validate();
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
    }
  }
  SUBCASE("non-numeric field") {
    auto bad = "x" + text.substr(1);
    CHECK_THROWS_AS(parse_session_csv(bad, tiny_meta()), ParseError);
  }
  SUBCASE("fractional label") {
    auto bad = text;
    bad.insert(bad.size() - 1, ".5");
    CHECK_THROWS_AS(parse_session_csv(bad, tiny_meta()), ParseError);
  }
  SUBCASE("truncated recording") {
    const auto cut = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
    CHECK_THROWS_AS(parse_session_csv(cut, tiny_meta()), ParseError);
  }
  SUBCASE("unbalanced repetitions") {
    auto s = parse_session_csv(text, tiny_meta());
    for (int t = 10; t < 15; ++t) s.labels[static_cast<std::size_t>(t)] = 1;
    CHECK_THROWS_AS(s.validate(), ParseError);
  }
}

TEST_CASE("write and load round trip") {
  const auto dir = scratch_dir("roundtrip");
  DeltaSession s = parse_session_csv(tiny_csv(), tiny_meta());
  s.meta.day = 4;
  s.meta.subject = 9;
  s.samples(0, 0) = 0.1;
  s.samples(1, 1) = -1e-7;
  const std::string path = (dir / "s.csv").string();
  write_session(path, s);
  const DeltaSession back = load_session(path);
  CHECK(back.samples == s.samples);
  CHECK(back.labels == s.labels);
  CHECK(back.meta.day == 4);
  CHECK(back.meta.subject == 9);
  CHECK(format_session_csv(back) == text::read_file(path));

  CHECK_THROWS_AS(load_session((dir / "none.csv").string()), IoError);

  // Custom decoders plug into the same entry point.
  bool called = false;
  const auto via = load_session(path, [&](const std::string& p) {
    called = true;
    return decode_csv_session(p);
  });
  CHECK(called);
  CHECK(via.samples == s.samples);
  std::filesystem::remove_all(dir);
}

TEST_CASE("frame files round trip") {
  const auto dir = scratch_dir("frames");
  const FrameSession f = frame_session(3, 4, 2, 5, 2);
  const std::string path = (dir / "f.csv").string();
  write_frames(path, f);
  const FrameSession g = load_frames(path);
  CHECK(g.frames == f.frames);
  CHECK(g.labels == f.labels);
  CHECK(g.repetition == f.repetition);
  CHECK(g.day == 2);
  CHECK(g.classes == 3);
  CHECK(g.repetitions == 4);
  CHECK_THROWS_AS(load_frames((dir / "none.csv").string()), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("split counts follow the plan") {
  const FrameSession s = frame_session(7, 10, 3, 2);
  const auto batch = SplitPlan::batch();
  const auto d0 = make_split(s, batch, 0);
  CHECK(d0.train.size() == 2 * 7 * 3);
  CHECK(d0.update.size() == 0);
  CHECK(d0.test.size() == 8 * 7 * 3);
  const auto d1 = make_split(s, batch, 3);
  CHECK(d1.train.size() == 0);
  CHECK(d1.update.size() == 0);
  CHECK(d1.test.size() == 10 * 7 * 3);

  const auto inc = SplitPlan::incremental();
  const auto i0 = make_split(s, inc, 0);
  CHECK(i0.train.size() == 2 * 7 * 3);
  CHECK(i0.test.size() == 8 * 7 * 3);
  const auto i1 = make_split(s, inc, 1);
  CHECK(i1.update.size() == 2 * 7 * 3);
  CHECK(i1.test.size() == 8 * 7 * 3);

  for (const auto* split : {&d0, &d1, &i0, &i1}) {
    std::set<Index> rows;
    for (const auto* part : {&split->train, &split->update, &split->test})
      for (Index r : part->rows) CHECK(rows.insert(r).second);
    CHECK(static_cast<Index>(rows.size()) == s.size());
  }
  CHECK(i0.train.X.row(0) == s.frames.row(i0.train.rows[0]));
}

TEST_CASE("subsets and concatenation") {
  const FrameSession s = frame_session(2, 3, 2, 4);
  const std::vector<Index> a{0, 5}, b{7};
  const LabeledSet sa = subset(s, a), sb = subset(s, b);
  const std::vector<LabeledSet> both{sa, sb};
  const LabeledSet c = concatenate(both);
  CHECK(c.size() == 3);
  CHECK(c.X.row(2) == s.frames.row(7));
  CHECK(c.labels[2] == s.labels[7]);
  CHECK(c.one_hot().rowwise().sum().isOnes());
}

TEST_CASE("day orders") {
  const std::vector<int> three{1, 2, 3};
  const auto all3 = enumerate_day_orders(three);
  CHECK(all3.size() == 6);
  CHECK(all3.front() == three);
  CHECK(all3.back() == std::vector<int>{3, 2, 1});
  const std::vector<int> six{1, 2, 3, 4, 5, 6};
  const auto all6 = enumerate_day_orders(six);
  CHECK(all6.size() == 720);
  CHECK(std::set<std::vector<int>>(all6.begin(), all6.end()).size() == 720);
  CHECK(permutation_count(6) == 720);

  const auto some = sample_day_orders(six, 20, 5);
  CHECK(some.size() == 20);
  CHECK(some.front() == six);
  CHECK(std::set<std::vector<int>>(some.begin(), some.end()).size() == 20);
  CHECK(sample_day_orders(six, 20, 5) == some);
  CHECK(sample_day_orders(six, 1000, 5).size() == 720);
  CHECK(sample_day_orders(six, 1, 5) == std::vector<std::vector<int>>{six});
}

TEST_CASE("settings parse") {
  CHECK(parse_setting("batch") == Setting::batch);
  CHECK(parse_setting("incremental") == Setting::incremental);
  CHECK(to_string(Setting::incremental) == "incremental");
  CHECK_THROWS_AS(parse_setting("online"), InvalidArgument);
}

TEST_CASE("synthetic sessions are deterministic and well formed") {
  ShiftConfig cfg = ShiftConfig::strong_shift(3);
  cfg.channels = 4;
  cfg.sessions = 2;
  cfg.samples_per_rep = 400;
  const DeltaSession a = generate_session(cfg, 1);
  const DeltaSession b = generate_session(cfg, 1);
  CHECK(format_session_csv(a) == format_session_csv(b));
  CHECK_NOTHROW(a.validate());
  CHECK(a.rows() == 7 * 10 * 400);
  CHECK((a.samples.array() == a.samples.array().round()).all());
  CHECK(format_session_csv(generate_session(cfg, 0)) != format_session_csv(a));

  ShiftConfig other = cfg;
  other.seed = 4;
  CHECK(format_session_csv(generate_session(other, 1)) != format_session_csv(a));

  const ShiftConfig back = ShiftConfig::from_config(cfg.to_config());
  CHECK(back.to_config().to_string() == cfg.to_config().to_string());
  CHECK_THROWS_AS(generate_session(cfg, 2), InvalidArgument);
}

TEST_CASE("without drift every session shares the same amplitude pattern") {
  const auto amps = session_amplitudes(ShiftConfig::no_shift(2));
  REQUIRE(amps.size() == 6);
  for (const auto& a : amps) CHECK(a == amps[0]);
  const auto shifted = session_amplitudes(ShiftConfig::strong_shift(2));
  CHECK(shifted[0] == amps[0]);
  CHECK(shifted[3] != amps[3]);
}

TEST_CASE("preprocessing yields 37 normalized frames per repetition") {
  ShiftConfig cfg = ShiftConfig::no_shift(1);
  cfg.channels = 4;
  cfg.sessions = 1;
  const DeltaSession s = generate_session(cfg, 0);
  const PreprocessResult r = preprocess_session(s);
  CHECK(r.frames_per_repetition == 37);
  CHECK(r.frames.size() == 2590);
  CHECK(r.frames.dim() == 4);
  CHECK(r.frames.frames.minCoeff() == 0.0);
  CHECK(r.frames.frames.maxCoeff() == 1.0);
  for (Index c = 0; c < 4; ++c) {
    CHECK(r.frames.frames.col(c).minCoeff() == 0.0);
    CHECK(r.frames.frames.col(c).maxCoeff() == 1.0);
  }
  for (int rep = 0; rep < 10; ++rep)
    CHECK(std::count(r.frames.repetition.begin(), r.frames.repetition.end(), rep) == 7 * 37);
  CHECK_NOTHROW(r.frames.validate());
}
