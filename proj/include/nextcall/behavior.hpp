#pragma once

#include "nextcall/call_data.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nextcall {

struct EgoModelConfig {
  std::size_t min_events = 50;   // full-log eligibility floor
  double train_fraction = 0.8;   // chronological head kept for training
};

struct NoOutgoingCallsError : std::runtime_error {
  explicit NoOutgoingCallsError(const std::string& ego_id);
};
struct TooFewEventsError : std::runtime_error {
  TooFewEventsError(const std::string& ego_id, std::size_t n, std::size_t min_events);
};

/// Result of mean-threshold contact filtering.  An alter stays when its
/// outgoing-call count is >= the mean count over all alters the ego called
/// at least once.
struct AlterFilter {
  std::vector<std::string> class_set;  // kept alters: outgoing count desc, ties id asc
  std::vector<std::string> removed;    // dropped alters, id asc
  double threshold = 0.0;              // the mean used as cutoff
};

AlterFilter filter_alters(const EgoLog& ego);

/// First ceil(train_fraction * n) events (all directions) train, rest test.
std::pair<std::vector<CallEvent>, std::vector<CallEvent>> split_chronological(
    const EgoLog& ego, const EgoModelConfig& config);

/// One ego prepared for modeling: filtering runs on the full log, the split
/// happens afterwards, so the class set is independent of the split point.
struct FilteredEgo {
  std::string ego_id;
  std::vector<std::string> class_set;
  std::vector<CallEvent> train_events;
  std::vector<CallEvent> test_events;
};

FilteredEgo prepare_ego(const EgoLog& ego, const EgoModelConfig& config);

/// Ids of egos that satisfy every modeling precondition: at least min_events
/// events, at least two retained alters, and at least one outgoing call in
/// the test segment.
std::vector<std::string> eligible_egos(std::span<const EgoLog> egos,
                                       const EgoModelConfig& config);

}  // namespace nextcall
