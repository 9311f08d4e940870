#include "myo/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "myo/error.hpp"
#include "myo/knn.hpp"
#include "myo/rng.hpp"
#include "myo/text_format.hpp"

namespace myo::eval {

namespace {

void check_sessions(std::span<const data::FrameSession> sessions) {
  if (sessions.empty()) throw InvalidArgument("protocol needs at least one session");
  for (const auto& s : sessions) {
    s.validate();
    if (s.classes != sessions[0].classes || s.dim() != sessions[0].dim())
      throw InvalidArgument("sessions disagree on class count or feature dimension");
    if (s.subject != sessions[0].subject)
      throw InvalidArgument("sessions belong to different subjects");
  }
}

DayResult evaluate_day(const Classifier& model, const data::FrameSession& session,
                       const data::LabeledSet& test, std::vector<double>* timings) {
  DayResult r;
  r.day = session.day;
  r.confusion = Eigen::MatrixXi::Zero(session.classes, session.classes);
  std::vector<int> pred;
  if (timings == nullptr) {
    pred = model.predict_rows(test.X);
  } else {
    using clock = std::chrono::steady_clock;
    pred.reserve(static_cast<std::size_t>(test.size()));
    for (Index i = 0; i < test.size(); ++i) {
      const Eigen::VectorXd x = test.X.row(i).transpose();
      const auto t0 = clock::now();
      pred.push_back(model.predict(x));
      timings->push_back(std::chrono::duration<double, std::nano>(clock::now() - t0).count());
    }
  }
  r.total = test.size();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++r.confusion(test.labels[i], pred[i]);
    if (pred[i] == test.labels[i]) ++r.correct;
  }
  r.accuracy = r.total > 0 ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;

  // Repetition-level majority vote; the vote order follows the frames.
  std::map<std::pair<int, int>, std::vector<int>> per_rep;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto row = static_cast<std::size_t>(test.rows[i]);
    per_rep[{test.labels[i], session.repetition[row]}].push_back(pred[i]);
  }
  for (const auto& [key, votes] : per_rep) {
    ++r.rep_total;
    if (majority_label(votes, session.classes) == key.first) ++r.rep_correct;
  }
  r.rep_accuracy =
      r.rep_total > 0 ? static_cast<double>(r.rep_correct) / static_cast<double>(r.rep_total) : 0.0;
  r.test_rows = test.rows;
  return r;
}

std::string order_string(const std::vector<int>& order) {
  std::string s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(order[i]);
  }
  return s;
}

}  // namespace

Hyperparams resolve_params(const data::LabeledSet& train, const ProtocolOptions& o) {
  if (o.params) return *o.params;
  auto sel = o.selection;
  sel.seed = derive_seed(o.seed, "cv");
  sel.rf_seed = derive_seed(o.seed, "rf");
  return modelsel::select_hyperparameters(train, o.method, sel).best;
}

ProtocolRun run_protocol(std::span<const data::FrameSession> sessions, data::Setting setting,
                         const ProtocolOptions& o) {
  check_sessions(sessions);
  if (setting == data::Setting::incremental && !is_incremental(o.method))
    throw InvalidArgument("the incremental setting needs an incremental method, got '" +
                          std::string(to_string(o.method)) + "'");
  data::SplitPlan plan = o.plan;
  plan.setting = setting;

  ProtocolRun run;
  run.subject = sessions[0].subject;
  run.setting = setting;
  run.method = o.method;
  for (const auto& s : sessions) run.order.push_back(s.day);

  std::vector<double> timings;
  std::vector<double>* timing_sink = o.time_predictions ? &timings : nullptr;
  std::unique_ptr<Classifier> model;
  for (std::size_t p = 0; p < sessions.size(); ++p) {
    const auto split = data::make_split(sessions[p], plan, static_cast<Index>(p));
    if (p == 0) {
      if (split.train.size() == 0) throw InvalidArgument("first day has an empty training split");
      run.params = resolve_params(split.train, o);
      run.selected = !o.params.has_value();
      model = make_classifier(o.method, run.params, sessions[0].dim(), sessions[0].classes);
      model->fit(split.train.X, split.train.labels);
    } else if (split.update.size() > 0) {
      model->update(split.update.X, split.update.labels);
    }
    DayResult day = evaluate_day(*model, sessions[p], split.test, timing_sink);
    day.position = static_cast<Index>(p);
    day.train_rows = split.train.rows;
    day.update_rows = split.update.rows;
    run.days.push_back(std::move(day));
  }
  run.final_weights = model->weights();
  run.latency = summarize_latency(std::move(timings));
  return run;
}

ProtocolRun run_batch_protocol(std::span<const data::FrameSession> sessions,
                               const ProtocolOptions& o) {
  return run_protocol(sessions, data::Setting::batch, o);
}

ProtocolRun run_incremental_protocol(std::span<const data::FrameSession> sessions,
                                     const ProtocolOptions& o) {
  return run_protocol(sessions, data::Setting::incremental, o);
}

std::vector<ProtocolRun> run_permutations(std::span<const data::FrameSession> sessions,
                                          std::span<const std::vector<int>> orders,
                                          data::Setting setting, const ProtocolOptions& o) {
  check_sessions(sessions);
  std::map<int, std::size_t> by_day;
  for (std::size_t i = 0; i < sessions.size(); ++i)
    if (!by_day.emplace(sessions[i].day, i).second)
      throw InvalidArgument("duplicate day " + std::to_string(sessions[i].day));

  std::map<int, Hyperparams> selected;
  std::vector<ProtocolRun> runs;
  for (const auto& order : orders) {
    std::vector<data::FrameSession> ordered;
    for (int d : order) {
      auto it = by_day.find(d);
      if (it == by_day.end()) throw InvalidArgument("day order names unknown day " + std::to_string(d));
      ordered.push_back(sessions[it->second]);
    }
    if (ordered.empty()) throw InvalidArgument("empty day order");
    ProtocolOptions opt = o;
    const bool cached = !o.params && selected.count(order.front()) > 0;
    if (cached) opt.params = selected.at(order.front());
    auto run = run_protocol(ordered, setting, opt);
    if (!o.params) {
      run.selected = true;
      selected.emplace(order.front(), run.params);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

DifferenceDistribution accuracy_difference_distribution(std::span<const ProtocolRun> a,
                                                        std::span<const ProtocolRun> b) {
  using Key = std::pair<int, std::vector<int>>;
  std::map<Key, const ProtocolRun*> index_b;
  for (const auto& r : b)
    if (!index_b.emplace(Key{r.subject, r.order}, &r).second)
      throw InvalidArgument("duplicate run for subject " + std::to_string(r.subject) +
                            " order " + order_string(r.order));
  if (a.size() != b.size())
    throw InvalidArgument("unpaired runs: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));

  DifferenceDistribution out;
  std::map<Key, int> seen_a;
  std::map<Index, std::vector<double>> by_position;
  for (const auto& ra : a) {
    const Key key{ra.subject, ra.order};
    if (seen_a[key]++ > 0)
      throw InvalidArgument("duplicate run for subject " + std::to_string(ra.subject) +
                            " order " + order_string(ra.order));
    auto it = index_b.find(key);
    if (it == index_b.end())
      throw InvalidArgument("no partner run for subject " + std::to_string(ra.subject) +
                            " order " + order_string(ra.order));
    const auto& rb = *it->second;
    if (ra.days.size() != rb.days.size())
      throw InvalidArgument("paired runs have different day counts");
    for (std::size_t p = 0; p < ra.days.size(); ++p) {
      const double diff = ra.days[p].accuracy - rb.days[p].accuracy;
      out.samples.push_back({ra.subject, ra.order, static_cast<Index>(p), ra.days[p].day, diff});
      by_position[static_cast<Index>(p)].push_back(diff);
    }
  }
  for (auto& [pos, v] : by_position) {
    PositionSummary s;
    s.position = pos;
    s.count = static_cast<Index>(v.size());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    s.q25 = quantile(v, 0.25);
    s.median = quantile(v, 0.5);
    s.q75 = quantile(v, 0.75);
    out.per_position.push_back(s);
  }
  return out;
}

std::string emit_report(std::span<const ProtocolRun> runs) {
  std::string out =
      "# myoadapt-report v1\n"
      "subject\tpermutation\tsetting\tmethod\tposition\tday\tcorrect\ttotal\taccuracy\t"
      "rep_correct\trep_total\trep_accuracy\tlambda\tgamma\trf_dim\tk\n";
  for (const auto& r : runs) {
    const std::string prefix = std::to_string(r.subject) + '\t' + order_string(r.order) + '\t' +
                               std::string(data::to_string(r.setting)) + '\t' +
                               std::string(to_string(r.method)) + '\t';
    const std::string suffix = text::format_double(r.params.lambda) + '\t' +
                               text::format_double(r.params.gamma) + '\t' +
                               std::to_string(r.params.rf_dim) + '\t' + std::to_string(r.params.k);
    for (const auto& d : r.days) {
      out += prefix;
      out += std::to_string(d.position + 1) + '\t' + std::to_string(d.day) + '\t' +
             std::to_string(d.correct) + '\t' + std::to_string(d.total) + '\t' +
             text::format_double(d.accuracy) + '\t' + std::to_string(d.rep_correct) + '\t' +
             std::to_string(d.rep_total) + '\t' + text::format_double(d.rep_accuracy) + '\t';
      out += suffix;
      out += '\n';
    }
  }
  return out;
}

std::string emit_summary(std::span<const ProtocolRun> runs) {
  struct Acc {
    std::vector<double> frame, rep;
  };
  std::vector<std::tuple<std::string, std::string, Index>> keys;
  std::map<std::tuple<std::string, std::string, Index>, Acc> groups;
  for (const auto& r : runs)
    for (const auto& d : r.days) {
      auto key = std::make_tuple(std::string(to_string(r.method)),
                                 std::string(data::to_string(r.setting)), d.position);
      auto [it, fresh] = groups.try_emplace(key);
      if (fresh) keys.push_back(key);
      it->second.frame.push_back(d.accuracy);
      it->second.rep.push_back(d.rep_accuracy);
    }
  std::string out =
      "# myoadapt-summary v1\n"
      "method\tsetting\tposition\truns\tmean_accuracy\tstd_accuracy\tmean_rep_accuracy\n";
  for (const auto& key : keys) {
    const auto& g = groups.at(key);
    const double n = static_cast<double>(g.frame.size());
    const double mean = std::accumulate(g.frame.begin(), g.frame.end(), 0.0) / n;
    double ss = 0;
    for (double v : g.frame) ss += (v - mean) * (v - mean);
    const double rep = std::accumulate(g.rep.begin(), g.rep.end(), 0.0) / n;
    out += std::get<0>(key) + '\t' + std::get<1>(key) + '\t' + std::to_string(std::get<2>(key) + 1) +
           '\t' + std::to_string(g.frame.size()) + '\t' + text::format_double(mean) + '\t' +
           text::format_double(std::sqrt(ss / n)) + '\t' + text::format_double(rep) + '\n';
  }
  return out;
}

std::string format_differences(const DifferenceDistribution& d) {
  std::string out = "# myoadapt-diff v1\nposition\tcount\tmean\tmin\tq25\tmedian\tq75\tmax\n";
  for (const auto& s : d.per_position) {
    out += std::to_string(s.position + 1) + '\t' + std::to_string(s.count);
    for (double v : {s.mean, s.min, s.q25, s.median, s.q75, s.max}) out += '\t' + text::format_double(v);
    out += '\n';
  }
  return out;
}

}  // namespace myo::eval
