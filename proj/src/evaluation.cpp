#include "nextcall/evaluation.hpp"

#include "nextcall/io.hpp"
#include "nextcall/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace nextcall {

const char* to_string(Method m) {
  switch (m) {
    case Method::TopKRec: return "topk_recommendations";
    case Method::TopKFrequent: return "topk_frequent";
    case Method::LastK: return "last_k";
  }
  return "?";
}

NoTestCallsError::NoTestCallsError(const std::string& ego_id)
    : std::runtime_error("ego " + ego_id + " has no in-class outgoing test calls") {}

std::vector<std::size_t> rank_classes(std::span<const double> probs) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  return order;
}

RecommendationList topk_recommend(const ModelWeights& model, const FeatureEncoder& encoder,
                                  const HistoryState& history, std::int64_t t, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  auto probs = predict_proba(model, encoder.encode(history, t));
  auto order = rank_classes(probs);
  RecommendationList out;
  out.query_time = t;
  std::size_t take = std::min(k, order.size());
  out.entries.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.entries.push_back(encoder.class_set()[order[i]]);
  return out;
}

std::vector<std::string> baseline_last_k(std::span<const CallEvent> history, std::int64_t t,
                                         std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  std::vector<std::string> out;
  for (auto it = history.rbegin(); it != history.rend() && out.size() < k; ++it) {
    if (it->timestamp >= t) continue;
    if (std::find(out.begin(), out.end(), it->alter_id) == out.end()) {
      out.push_back(it->alter_id);
    }
  }
  return out;
}

std::vector<std::string> baseline_top_frequent(std::span<const CallEvent> train_events,
                                               std::span<const std::string> class_set,
                                               std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < class_set.size(); ++i) index.emplace(class_set[i], i);

  std::vector<std::size_t> counts(class_set.size(), 0);
  for (const auto& e : train_events) {
    if (e.direction != Direction::Outgoing) continue;
    auto it = index.find(e.alter_id);
    if (it != index.end()) ++counts[it->second];
  }

  std::vector<std::size_t> order(class_set.size());
  std::iota(order.begin(), order.end(), 0);
  // stable: equal counts keep class-set order
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });

  std::vector<std::string> out;
  std::size_t take = std::min(k, order.size());
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(class_set[order[i]]);
  return out;
}

namespace {

constexpr std::size_t kNoRank = std::numeric_limits<std::size_t>::max();

/// Rank of every in-class outgoing test call under the three methods, from
/// one chronological sweep.  Events sharing a timestamp are evaluated before
/// any of them enters the history, matching the strictly-before-t rule.
struct CallRanks {
  std::vector<std::size_t> model_rank;
  std::vector<std::size_t> last_rank;
  std::vector<std::size_t> freq_rank;
  std::vector<std::int64_t> call_time;
  std::vector<std::size_t> call_class;
  std::size_t out_of_class = 0;
};

CallRanks compute_call_ranks(const FilteredEgo& fe, const ModelWeights& model,
                             const FeatureEncoder& encoder) {
  CallRanks out;

  auto freq_order = baseline_top_frequent(fe.train_events, fe.class_set, fe.class_set.size());
  std::unordered_map<std::string_view, std::size_t> freq_rank_of;
  for (std::size_t i = 0; i < freq_order.size(); ++i) freq_rank_of.emplace(freq_order[i], i + 1);

  HistoryState state;
  std::vector<std::string> recency;  // distinct alters, most recent first

  auto push_event = [&](const CallEvent& e) {
    state.push(e);
    auto it = std::find(recency.begin(), recency.end(), e.alter_id);
    if (it != recency.end()) recency.erase(it);
    recency.insert(recency.begin(), e.alter_id);
  };

  std::vector<const CallEvent*> all;
  all.reserve(fe.train_events.size() + fe.test_events.size());
  for (const auto& e : fe.train_events) all.push_back(&e);
  for (const auto& e : fe.test_events) all.push_back(&e);
  std::size_t n_train = fe.train_events.size();

  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j]->timestamp == all[i]->timestamp) ++j;

    for (std::size_t q = i; q < j; ++q) {
      if (q < n_train) continue;
      const CallEvent& e = *all[q];
      if (e.direction != Direction::Outgoing) continue;
      auto cls = encoder.class_index(e.alter_id);
      if (!cls) {
        ++out.out_of_class;
        continue;
      }

      auto probs = predict_proba(model, encoder.encode(state, e.timestamp));
      auto order = rank_classes(probs);
      std::size_t model_rank = kNoRank;
      for (std::size_t r = 0; r < order.size(); ++r) {
        if (order[r] == *cls) {
          model_rank = r + 1;
          break;
        }
      }
      std::size_t last_rank = kNoRank;
      for (std::size_t r = 0; r < recency.size(); ++r) {
        if (recency[r] == e.alter_id) {
          last_rank = r + 1;
          break;
        }
      }
      auto fit = freq_rank_of.find(e.alter_id);

      out.model_rank.push_back(model_rank);
      out.last_rank.push_back(last_rank);
      out.freq_rank.push_back(fit == freq_rank_of.end() ? kNoRank : fit->second);
      out.call_time.push_back(e.timestamp);
      out.call_class.push_back(*cls);
    }
    for (std::size_t q = i; q < j; ++q) push_event(*all[q]);
    i = j;
  }
  return out;
}

/// minrank[call][eps index]: best model rank of the call's class over grid
/// instants within +-epsilon of the call.  The grid starts at the first test
/// event and steps by grid_step up to the last one.
std::vector<std::vector<std::size_t>> epsilon_minranks(const FilteredEgo& fe,
                                                       const ModelWeights& model,
                                                       const FeatureEncoder& encoder,
                                                       const CallRanks& calls,
                                                       std::span<const std::int64_t> epsilons,
                                                       std::int64_t grid_step) {
  std::vector<std::vector<std::size_t>> minrank(
      calls.call_time.size(), std::vector<std::size_t>(epsilons.size(), kNoRank));
  if (fe.test_events.empty() || calls.call_time.empty()) return minrank;

  std::int64_t t0 = fe.test_events.front().timestamp;
  std::int64_t t_last = fe.test_events.back().timestamp;
  std::size_t n_instants = static_cast<std::size_t>((t_last - t0) / grid_step) + 1;

  std::vector<std::vector<std::uint32_t>> rank_of(n_instants);

  HistoryState state;
  std::vector<const CallEvent*> all;
  all.reserve(fe.train_events.size() + fe.test_events.size());
  for (const auto& e : fe.train_events) all.push_back(&e);
  for (const auto& e : fe.test_events) all.push_back(&e);

  std::size_t next_event = 0;
  for (std::size_t inst = 0; inst < n_instants; ++inst) {
    std::int64_t g = t0 + grid_step * static_cast<std::int64_t>(inst);
    while (next_event < all.size() && all[next_event]->timestamp < g) {
      state.push(*all[next_event]);
      ++next_event;
    }
    auto probs = predict_proba(model, encoder.encode(state, g));
    auto order = rank_classes(probs);
    std::vector<std::uint32_t> ranks(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
      ranks[order[r]] = static_cast<std::uint32_t>(r + 1);
    }
    rank_of[inst] = std::move(ranks);
  }

  for (std::size_t c = 0; c < calls.call_time.size(); ++c) {
    std::int64_t t = calls.call_time[c];
    std::size_t cls = calls.call_class[c];
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      std::int64_t lo = t - epsilons[e] - t0;
      std::int64_t hi = t + epsilons[e] - t0;
      std::int64_t j_lo = lo <= 0 ? 0 : (lo + grid_step - 1) / grid_step;
      std::int64_t j_hi = hi < 0 ? -1 : std::min<std::int64_t>(hi / grid_step,
                                                               static_cast<std::int64_t>(n_instants) - 1);
      std::size_t best = kNoRank;
      for (std::int64_t j = j_lo; j <= j_hi; ++j) {
        best = std::min<std::size_t>(best, rank_of[static_cast<std::size_t>(j)][cls]);
      }
      minrank[c][e] = best;
    }
  }
  return minrank;
}

double fraction_within(std::span<const std::size_t> ranks, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t r : ranks) {
    if (r <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

}  // namespace

double topk_accuracy(const FilteredEgo& ego, const ModelWeights& model, Method method,
                     std::size_t k, Clock clock) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  FeatureEncoder encoder(ego.class_set, clock);
  auto ranks = compute_call_ranks(ego, model, encoder);
  if (ranks.model_rank.empty()) throw NoTestCallsError(ego.ego_id);
  switch (method) {
    case Method::TopKRec: return fraction_within(ranks.model_rank, k);
    case Method::TopKFrequent: return fraction_within(ranks.freq_rank, k);
    default: return fraction_within(ranks.last_rank, k);
  }
}

double epsilon_accuracy(const FilteredEgo& ego, const ModelWeights& model, std::size_t k,
                        std::int64_t epsilon, std::int64_t grid_step, Clock clock) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  if (epsilon < 0) throw std::invalid_argument("epsilon must be >= 0");
  if (grid_step < 1) throw std::invalid_argument("grid_step must be >= 1");
  FeatureEncoder encoder(ego.class_set, clock);
  auto ranks = compute_call_ranks(ego, model, encoder);
  if (ranks.model_rank.empty()) throw NoTestCallsError(ego.ego_id);
  std::int64_t eps[] = {epsilon};
  auto minranks = epsilon_minranks(ego, model, encoder, ranks, eps, grid_step);
  std::size_t hits = 0;
  for (const auto& row : minranks) {
    if (row[0] <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(minranks.size());
}

TrainingSet make_training_set(const FilteredEgo& ego, const FeatureEncoder& encoder) {
  TrainingSet out;
  HistoryState state;
  const auto& train = ego.train_events;
  std::size_t i = 0;
  while (i < train.size()) {
    std::size_t j = i;
    while (j < train.size() && train[j].timestamp == train[i].timestamp) ++j;
    for (std::size_t q = i; q < j; ++q) {
      if (train[q].direction != Direction::Outgoing) continue;
      if (auto cls = encoder.class_index(train[q].alter_id)) {
        out.features.push_back(encoder.encode(state, train[q].timestamp));
        out.labels.push_back(*cls);
      }
    }
    for (std::size_t q = i; q < j; ++q) state.push(train[q]);
    i = j;
  }
  return out;
}

namespace {

EgoEvaluation evaluate_one(const EgoLog& ego, const EvaluationConfig& cfg) {
  EgoEvaluation out;
  out.ego_id = ego.ego_id;
  auto skip = [&out](const char* reason) {
    out.skipped = true;
    out.skip_reason = reason;
    return out;
  };

  if (ego.events.size() < cfg.model.min_events) return skip("too few events");
  AlterFilter filter;
  try {
    filter = filter_alters(ego);
  } catch (const NoOutgoingCallsError&) {
    return skip("no outgoing calls");
  }
  if (filter.class_set.size() < 2) return skip("single class after filtering");

  FilteredEgo fe = prepare_ego(ego, cfg.model);
  FeatureEncoder encoder(fe.class_set, cfg.clock);

  TrainingSet ts = make_training_set(fe, encoder);
  if (ts.features.empty()) return skip("no in-class outgoing training calls");

  ModelWeights model;
  auto started = std::chrono::steady_clock::now();
  try {
    model = train(ts.features, ts.labels, fe.class_set, encoder.continuous_indices(), cfg.train);
  } catch (const SingleClassError&) {
    return skip("single training class");
  }
  out.train_millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();
  out.train_meta = model.meta;

  auto ranks = compute_call_ranks(fe, model, encoder);
  out.out_of_class_calls = ranks.out_of_class;
  if (ranks.model_rank.empty()) return skip("no in-class outgoing test calls");
  out.n_test_calls = ranks.model_rank.size();

  for (std::size_t m = 0; m < kAllMethods.size(); ++m) {
    const auto& rank_vec = kAllMethods[m] == Method::TopKRec     ? ranks.model_rank
                           : kAllMethods[m] == Method::TopKFrequent ? ranks.freq_rank
                                                                    : ranks.last_rank;
    out.accuracy[m].reserve(cfg.ks.size());
    for (std::size_t k : cfg.ks) out.accuracy[m].push_back(fraction_within(rank_vec, k));
  }

  auto minranks = epsilon_minranks(fe, model, encoder, ranks, cfg.epsilons, cfg.grid_step);
  out.epsilon_hit.assign(cfg.ks.size(), std::vector<double>(cfg.epsilons.size(), 0.0));
  for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
    for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
      std::size_t hits = 0;
      for (const auto& row : minranks) {
        if (row[ei] <= cfg.ks[ki]) ++hits;
      }
      out.epsilon_hit[ki][ei] =
          static_cast<double>(hits) / static_cast<double>(out.n_test_calls);
    }
  }
  return out;
}

void validate_config(const EvaluationConfig& cfg) {
  if (cfg.ks.empty()) throw std::invalid_argument("k list must not be empty");
  for (std::size_t i = 0; i < cfg.ks.size(); ++i) {
    if (cfg.ks[i] == 0) throw std::invalid_argument("k must be >= 1");
    if (i > 0 && cfg.ks[i] <= cfg.ks[i - 1]) {
      throw std::invalid_argument("k list must be strictly ascending");
    }
  }
  if (cfg.epsilons.empty()) throw std::invalid_argument("epsilon list must not be empty");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    if (cfg.epsilons[i] < 0) throw std::invalid_argument("epsilon must be >= 0");
    if (i > 0 && cfg.epsilons[i] <= cfg.epsilons[i - 1]) {
      throw std::invalid_argument("epsilon list must be strictly ascending");
    }
  }
  if (cfg.grid_step < 1) throw std::invalid_argument("grid_step must be >= 1");
}

}  // namespace

EvaluationReport evaluate_dataset(std::span<const EgoLog> egos, const EvaluationConfig& config) {
  validate_config(config);

  EvaluationReport report;
  report.ks = config.ks;
  report.epsilons = config.epsilons;
  report.egos.resize(egos.size());

  parallel_for(egos.size(), config.threads,
               [&](std::size_t i) { report.egos[i] = evaluate_one(egos[i], config); });

  report.mean_accuracy.fill(std::vector<double>(config.ks.size(), 0.0));
  report.mean_epsilon_hit.assign(config.ks.size(),
                                 std::vector<double>(config.epsilons.size(), 0.0));

  for (const auto& ego : report.egos) {
    if (ego.skipped) {
      ++report.n_skipped;
      continue;
    }
    ++report.n_evaluated;
    report.out_of_class_calls += ego.out_of_class_calls;
    for (std::size_t m = 0; m < kAllMethods.size(); ++m) {
      for (std::size_t ki = 0; ki < config.ks.size(); ++ki) {
        report.mean_accuracy[m][ki] += ego.accuracy[m][ki];
      }
    }
    for (std::size_t ki = 0; ki < config.ks.size(); ++ki) {
      for (std::size_t ei = 0; ei < config.epsilons.size(); ++ei) {
        report.mean_epsilon_hit[ki][ei] += ego.epsilon_hit[ki][ei];
      }
    }
  }
  if (report.n_evaluated > 0) {
    double inv = 1.0 / static_cast<double>(report.n_evaluated);
    for (auto& per_method : report.mean_accuracy) {
      for (double& v : per_method) v *= inv;
    }
    for (auto& row : report.mean_epsilon_hit) {
      for (double& v : row) v *= inv;
    }
  }
  return report;
}

void write_evaluation_csvs(const EvaluationReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto path = [&out_dir](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  {
    AtomicFile file(path("epsilon_accuracy.csv"));
    auto& out = file.stream();
    out << "epsilon_seconds,proportion\n";
    for (std::size_t ei = 0; ei < report.epsilons.size(); ++ei) {
      out << report.epsilons[ei] << ',' << format_double(report.mean_epsilon_hit[0][ei]) << '\n';
    }
    file.commit();
  }
  {
    AtomicFile file(path("k_sweep.csv"));
    auto& out = file.stream();
    out << "k,epsilon_seconds,proportion\n";
    for (std::size_t ki = 0; ki < report.ks.size(); ++ki) {
      for (std::size_t ei = 0; ei < report.epsilons.size(); ++ei) {
        out << report.ks[ki] << ',' << report.epsilons[ei] << ','
            << format_double(report.mean_epsilon_hit[ki][ei]) << '\n';
      }
    }
    file.commit();
  }
  {
    AtomicFile file(path("method_comparison.csv"));
    auto& out = file.stream();
    out << "k,topk_recommendations,topk_frequent,last_k\n";
    for (std::size_t ki = 0; ki < report.ks.size(); ++ki) {
      out << report.ks[ki];
      for (std::size_t m = 0; m < kAllMethods.size(); ++m) {
        out << ',' << format_double(report.mean_accuracy[m][ki]);
      }
      out << '\n';
    }
    file.commit();
  }
  {
    AtomicFile file(path("per_ego.csv"));
    auto& out = file.stream();
    out << "ego_id,k,topk_recommendations,topk_frequent,last_k,n_test_calls,"
           "out_of_class_calls,train_iterations,train_loss\n";
    for (const auto& ego : report.egos) {
      if (ego.skipped) continue;
      for (std::size_t ki = 0; ki < report.ks.size(); ++ki) {
        out << ego.ego_id << ',' << report.ks[ki];
        for (std::size_t m = 0; m < kAllMethods.size(); ++m) {
          out << ',' << format_double(ego.accuracy[m][ki]);
        }
        out << ',' << ego.n_test_calls << ',' << ego.out_of_class_calls << ','
            << ego.train_meta.iterations << ',' << format_double(ego.train_meta.final_loss)
            << '\n';
      }
    }
    file.commit();
  }
  {
    AtomicFile file(path("skipped.csv"));
    auto& out = file.stream();
    out << "ego_id,reason\n";
    for (const auto& ego : report.egos) {
      if (ego.skipped) out << ego.ego_id << ',' << ego.skip_reason << '\n';
    }
    file.commit();
  }
}

}  // namespace nextcall
