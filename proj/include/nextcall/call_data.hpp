#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nextcall {

enum class Direction { Incoming, Outgoing, Missed };

const char* to_string(Direction d);

/// Case-insensitive lookup; nullopt for unrecognized tokens.
std::optional<Direction> direction_from_string(std::string_view text);

/// One call-detail record from the perspective of the device owner (ego).
struct CallEvent {
  std::string ego_id;
  std::string alter_id;
  std::int64_t timestamp = 0;  // epoch seconds
  Direction direction = Direction::Outgoing;

  friend bool operator==(const CallEvent&, const CallEvent&) = default;
};

/// Half-open observation interval [start, end).
struct TimeWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool contains(std::int64_t ts) const { return ts >= start && ts < end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// All events of one ego, timestamps nondecreasing; equal timestamps keep
/// input order.
struct EgoLog {
  std::string ego_id;
  std::vector<CallEvent> events;
  TimeWindow window;
};

struct DatasetSummary {
  std::size_t n_egos = 0;
  std::size_t n_events = 0;
  std::size_t n_pairs = 0;
  /// Distribution of per-ego daily call volume; unit-width bins keyed by
  /// floor(value), mass summing to 1.
  std::map<std::int64_t, double> calls_per_day_pdf;
  /// Distribution of per-ego mean events per contacted alter.
  std::map<std::int64_t, double> mean_calls_per_contact_hist;
};

struct MalformedRowError : std::runtime_error {
  MalformedRowError(std::size_t row, const std::string& reason);
  std::size_t row;
};

struct UnknownDirectionError : MalformedRowError {
  UnknownDirectionError(std::size_t row, const std::string& token);
};

struct EmptyDatasetError : std::runtime_error {
  EmptyDatasetError();
};

struct ParsedDataset {
  std::vector<EgoLog> egos;  // sorted by ego_id
  TimeWindow window;
  std::size_t rows_outside_window = 0;
};

/// Accepts epoch seconds or "YYYY-MM-DDTHH:MM:SS" (treated as UTC civil time).
std::optional<std::int64_t> parse_timestamp(std::string_view text);

/// Reads a call log CSV with header `ego_id,alter_id,timestamp,direction`.
/// When a window is given, rows outside it are dropped and counted; otherwise
/// the window is [min ts, max ts + 1).  Throws MalformedRowError (1-based row
/// numbers), UnknownDirectionError, or EmptyDatasetError if no rows survive.
ParsedDataset parse_call_log(std::istream& in, std::optional<TimeWindow> window = {});
ParsedDataset parse_call_log(const std::string& path, std::optional<TimeWindow> window = {});

/// Canonical CSV form: header, epoch-second timestamps, lowercase directions,
/// egos in id order.  parse(write(x)) == x for canonical inputs.
void write_call_log(std::span<const EgoLog> egos, std::ostream& out);
void write_call_log(std::span<const EgoLog> egos, const std::string& path);

/// Events keyed by alter id; per-alter order follows the ego log.
std::map<std::string, std::vector<CallEvent>> group_pairs(const EgoLog& ego);

DatasetSummary summarize(std::span<const EgoLog> egos);

}  // namespace nextcall
