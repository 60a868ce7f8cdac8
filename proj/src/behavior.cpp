#include "nextcall/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nextcall {

NoOutgoingCallsError::NoOutgoingCallsError(const std::string& ego_id)
    : std::runtime_error("ego " + ego_id + " has no outgoing calls") {}

TooFewEventsError::TooFewEventsError(const std::string& ego_id, std::size_t n,
                                     std::size_t min_events)
    : std::runtime_error("ego " + ego_id + " has " + std::to_string(n) + " events, needs " +
                         std::to_string(min_events)) {}

AlterFilter filter_alters(const EgoLog& ego) {
  std::map<std::string, std::size_t> outgoing;
  for (const auto& e : ego.events) {
    if (e.direction == Direction::Outgoing) ++outgoing[e.alter_id];
  }
  if (outgoing.empty()) throw NoOutgoingCallsError(ego.ego_id);

  std::size_t total = 0;
  for (const auto& [id, count] : outgoing) total += count;
  double mean = static_cast<double>(total) / static_cast<double>(outgoing.size());

  AlterFilter out;
  out.threshold = mean;
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [id, count] : outgoing) {
    if (static_cast<double>(count) >= mean) {
      kept.emplace_back(id, count);
    } else {
      out.removed.push_back(id);
    }
  }
  // Class order: busiest first; equal counts fall back to id order, which the
  // map already provides.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  out.class_set.reserve(kept.size());
  for (auto& [id, count] : kept) out.class_set.push_back(std::move(id));
  return out;
}

std::pair<std::vector<CallEvent>, std::vector<CallEvent>> split_chronological(
    const EgoLog& ego, const EgoModelConfig& config) {
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  std::size_t n = ego.events.size();
  // The epsilon guards against 0.8 * n landing a hair above the integer it
  // represents exactly.
  auto n_train = static_cast<std::size_t>(
      std::ceil(config.train_fraction * static_cast<double>(n) - 1e-9));
  n_train = std::min(std::max<std::size_t>(n_train, n > 0 ? 1 : 0), n);

  std::vector<CallEvent> train(ego.events.begin(), ego.events.begin() + n_train);
  std::vector<CallEvent> test(ego.events.begin() + n_train, ego.events.end());
  return {std::move(train), std::move(test)};
}

FilteredEgo prepare_ego(const EgoLog& ego, const EgoModelConfig& config) {
  if (ego.events.size() < config.min_events) {
    throw TooFewEventsError(ego.ego_id, ego.events.size(), config.min_events);
  }
  FilteredEgo out;
  out.ego_id = ego.ego_id;
  out.class_set = filter_alters(ego).class_set;
  auto [train, test] = split_chronological(ego, config);
  out.train_events = std::move(train);
  out.test_events = std::move(test);
  return out;
}

std::vector<std::string> eligible_egos(std::span<const EgoLog> egos,
                                       const EgoModelConfig& config) {
  std::vector<std::string> out;
  for (const auto& ego : egos) {
    if (ego.events.size() < config.min_events) continue;
    AlterFilter filter;
    try {
      filter = filter_alters(ego);
    } catch (const NoOutgoingCallsError&) {
      continue;
    }
    if (filter.class_set.size() < 2) continue;
    auto [train, test] = split_chronological(ego, config);
    bool has_outgoing_test = std::any_of(test.begin(), test.end(), [](const CallEvent& e) {
      return e.direction == Direction::Outgoing;
    });
    if (!has_outgoing_test) continue;
    out.push_back(ego.ego_id);
  }
  return out;
}

}  // namespace nextcall
