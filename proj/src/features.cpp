#include "nextcall/features.hpp"

#include <cmath>

namespace nextcall {

EmptyClassSetError::EmptyClassSetError() : std::runtime_error("class set is empty") {}
NotOutgoingError::NotOutgoingError()
    : std::runtime_error("labels exist only for outgoing calls") {}

FeatureEncoder::FeatureEncoder(std::vector<std::string> class_set, Clock clock)
    : class_set_(std::move(class_set)), clock_(clock) {
  if (class_set_.empty()) throw EmptyClassSetError();
  index_.reserve(class_set_.size());
  for (std::size_t i = 0; i < class_set_.size(); ++i) index_.emplace(class_set_[i], i);
}

std::optional<std::size_t> FeatureEncoder::class_index(std::string_view alter_id) const {
  auto it = index_.find(std::string(alter_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> FeatureEncoder::encode(const HistoryState& history, std::int64_t t) const {
  std::vector<double> v(dimension(), 0.0);

  constexpr double kTwoPi = 6.283185307179586476925287;
  double minute = static_cast<double>(clock_.minute_of_day(t));
  v[kSin] = std::sin(kTwoPi * minute / static_cast<double>(kMinutesPerDay));
  v[kCos] = std::cos(kTwoPi * minute / static_cast<double>(kMinutesPerDay));
  v[kWeekday + static_cast<std::size_t>(clock_.weekday(t))] = 1.0;
  v[kNight] = clock_.is_daytime(t) ? 0.0 : 1.0;

  if (history.last) {
    if (auto idx = class_index(history.last->alter_id)) v[kLastAlter + *idx] = 1.0;
    v[last_direction_offset() + static_cast<std::size_t>(history.last->direction)] = 1.0;
    double minutes_since =
        static_cast<double>(t - history.last->timestamp) / static_cast<double>(kSecondsPerMinute);
    v[recency_any_index()] = std::log1p(minutes_since);
  } else {
    v[no_history_index()] = 1.0;
  }
  if (history.second_last) {
    if (auto idx = class_index(history.second_last->alter_id)) {
      v[second_last_alter_offset() + *idx] = 1.0;
    }
  }
  if (history.last_outgoing_ts) {
    double minutes_since =
        static_cast<double>(t - *history.last_outgoing_ts) / static_cast<double>(kSecondsPerMinute);
    v[recency_outgoing_index()] = std::log1p(minutes_since);
  }
  return v;
}

std::vector<double> FeatureEncoder::encode(std::span<const CallEvent> history,
                                           std::int64_t t) const {
  HistoryState state;
  // Only events strictly before the query instant count as history.
  const CallEvent* last = nullptr;
  const CallEvent* second_last = nullptr;
  for (const auto& e : history) {
    if (e.timestamp >= t) break;
    second_last = last;
    last = &e;
    if (e.direction == Direction::Outgoing) state.last_outgoing_ts = e.timestamp;
  }
  if (last) state.last = *last;
  if (second_last) state.second_last = *second_last;
  return encode(state, t);
}

std::vector<std::size_t> FeatureEncoder::continuous_indices() const {
  return {kSin, kCos, recency_any_index(), recency_outgoing_index()};
}

std::optional<std::size_t> label_of(const CallEvent& event, const FeatureEncoder& encoder) {
  if (event.direction != Direction::Outgoing) throw NotOutgoingError();
  return encoder.class_index(event.alter_id);
}

}  // namespace nextcall
