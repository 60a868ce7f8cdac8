#pragma once

#include "nextcall/call_data.hpp"
#include "nextcall/clock.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nextcall {

struct EmptyClassSetError : std::runtime_error {
  EmptyClassSetError();
};
struct NotOutgoingError : std::runtime_error {
  NotOutgoingError();
};

/// Rolling view of an event stream: everything the encoder needs from the
/// past.  push() events in timestamp order.
struct HistoryState {
  std::optional<CallEvent> last;
  std::optional<CallEvent> second_last;
  std::optional<std::int64_t> last_outgoing_ts;

  bool empty() const { return !last.has_value(); }

  void push(const CallEvent& e) {
    second_last = std::move(last);
    last = e;
    if (e.direction == Direction::Outgoing) last_outgoing_ts = e.timestamp;
  }
};

/// Maps (history, query time) to a fixed-length feature vector.  With C
/// classes the layout is
///
///   [0]            sin(2 pi * minute_of_day / 1440)
///   [1]            cos(2 pi * minute_of_day / 1440)
///   [2 .. 8]       weekday one-hot, Sunday first
///   [9]            night flag (local hour outside [07, 20))
///   [10 .. 10+C)   last-called/calling alter one-hot (all zero if the most
///                  recent event involves an alter outside the class set)
///   [10+C .. 10+2C)  the same for the second most recent event
///   [10+2C .. +3)  direction of the most recent event, one-hot
///   [13+2C]        log1p(minutes since the most recent event)
///   [14+2C]        log1p(minutes since the most recent outgoing call)
///   [15+2C]        no-history flag
///
/// for a total of 16 + 2C coordinates.  Absent history leaves the relevant
/// blocks at zero and sets the flag.
class FeatureEncoder {
 public:
  FeatureEncoder(std::vector<std::string> class_set, Clock clock = {});

  std::size_t n_classes() const { return class_set_.size(); }
  std::size_t dimension() const { return 16 + 2 * class_set_.size(); }
  const std::vector<std::string>& class_set() const { return class_set_; }
  Clock clock() const { return clock_; }

  std::optional<std::size_t> class_index(std::string_view alter_id) const;

  std::vector<double> encode(const HistoryState& history, std::int64_t t) const;
  std::vector<double> encode(std::span<const CallEvent> history, std::int64_t t) const;

  /// Coordinates that carry non-indicator values and get standardized during
  /// training: sin, cos, and the two recency terms.
  std::vector<std::size_t> continuous_indices() const;

  static constexpr std::size_t kSin = 0;
  static constexpr std::size_t kCos = 1;
  static constexpr std::size_t kWeekday = 2;  // 7 slots
  static constexpr std::size_t kNight = 9;
  static constexpr std::size_t kLastAlter = 10;  // C slots
  std::size_t second_last_alter_offset() const { return 10 + class_set_.size(); }
  std::size_t last_direction_offset() const { return 10 + 2 * class_set_.size(); }  // 3 slots
  std::size_t recency_any_index() const { return 13 + 2 * class_set_.size(); }
  std::size_t recency_outgoing_index() const { return 14 + 2 * class_set_.size(); }
  std::size_t no_history_index() const { return 15 + 2 * class_set_.size(); }

 private:
  std::vector<std::string> class_set_;
  std::unordered_map<std::string, std::size_t> index_;
  Clock clock_;
};

/// Class index of an outgoing call's callee; nullopt when the callee was
/// filtered out of the class set.  Non-outgoing events have no label.
std::optional<std::size_t> label_of(const CallEvent& event, const FeatureEncoder& encoder);

}  // namespace nextcall
