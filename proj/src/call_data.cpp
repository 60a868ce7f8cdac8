#include "nextcall/call_data.hpp"

#include "nextcall/clock.hpp"
#include "nextcall/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace nextcall {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::Incoming: return "incoming";
    case Direction::Outgoing: return "outgoing";
    case Direction::Missed: return "missed";
  }
  return "?";
}

std::optional<Direction> direction_from_string(std::string_view text) {
  std::string lower;
  lower.reserve(text.size());
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "incoming") return Direction::Incoming;
  if (lower == "outgoing") return Direction::Outgoing;
  if (lower == "missed") return Direction::Missed;
  return std::nullopt;
}

MalformedRowError::MalformedRowError(std::size_t row_, const std::string& reason)
    : std::runtime_error("row " + std::to_string(row_) + ": " + reason), row(row_) {}

UnknownDirectionError::UnknownDirectionError(std::size_t row_, const std::string& token)
    : MalformedRowError(row_, "unknown direction '" + token + "'") {}

EmptyDatasetError::EmptyDatasetError() : std::runtime_error("call log contains no usable rows") {}

namespace {

// Days from 1970-01-01 to y-m-d in the proleptic Gregorian calendar.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  std::int64_t era = floor_div(y, 400);
  unsigned yoe = static_cast<unsigned>(y - era * 400);                          // [0, 399]
  unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;                // [0, 365]
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;                         // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool days_in_month_ok(int y, unsigned m, unsigned d) {
  static constexpr unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12 || d < 1) return false;
  unsigned len = lengths[m - 1];
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) len = 29;
  return d <= len;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<int> parse_fixed(std::string_view s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) return std::nullopt;
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (auto epoch = parse_int(text)) return epoch;
  // YYYY-MM-DDTHH:MM:SS
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  auto year = parse_fixed(text, 0, 4);
  auto month = parse_fixed(text, 5, 2);
  auto day = parse_fixed(text, 8, 2);
  auto hour = parse_fixed(text, 11, 2);
  auto minute = parse_fixed(text, 14, 2);
  auto second = parse_fixed(text, 17, 2);
  if (!year || !month || !day || !hour || !minute || !second) return std::nullopt;
  if (!days_in_month_ok(*year, static_cast<unsigned>(*month), static_cast<unsigned>(*day))) {
    return std::nullopt;
  }
  if (*hour > 23 || *minute > 59 || *second > 59) return std::nullopt;
  return days_from_civil(*year, static_cast<unsigned>(*month), static_cast<unsigned>(*day)) *
             kSecondsPerDay +
         *hour * kSecondsPerHour + *minute * kSecondsPerMinute + *second;
}

ParsedDataset parse_call_log(std::istream& in, std::optional<TimeWindow> window) {
  std::string line;
  std::size_t row = 0;

  if (!std::getline(in, line)) throw EmptyDatasetError();
  ++row;
  {
    auto header = split_csv_line(line);
    static const char* expected[] = {"ego_id", "alter_id", "timestamp", "direction"};
    if (header.size() != 4) throw MalformedRowError(row, "header must have 4 columns");
    for (std::size_t i = 0; i < 4; ++i) {
      std::string got;
      for (char c : trim(header[i])) got.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      if (got != expected[i]) {
        throw MalformedRowError(row, "expected header column '" + std::string(expected[i]) +
                                         "', got '" + header[i] + "'");
      }
    }
  }

  std::vector<CallEvent> events;
  std::size_t dropped = 0;
  std::int64_t min_ts = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_ts = std::numeric_limits<std::int64_t>::min();

  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw MalformedRowError(row, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    CallEvent e;
    e.ego_id = std::string(trim(fields[0]));
    e.alter_id = std::string(trim(fields[1]));
    if (e.ego_id.empty()) throw MalformedRowError(row, "empty ego_id");
    if (e.alter_id.empty()) throw MalformedRowError(row, "empty alter_id");
    if (e.ego_id == e.alter_id) throw MalformedRowError(row, "ego_id equals alter_id");
    auto ts = parse_timestamp(fields[2]);
    if (!ts) throw MalformedRowError(row, "bad timestamp '" + fields[2] + "'");
    e.timestamp = *ts;
    auto dir = direction_from_string(trim(fields[3]));
    if (!dir) throw UnknownDirectionError(row, std::string(trim(fields[3])));
    e.direction = *dir;

    if (window && !window->contains(e.timestamp)) {
      ++dropped;
      continue;
    }
    min_ts = std::min(min_ts, e.timestamp);
    max_ts = std::max(max_ts, e.timestamp);
    events.push_back(std::move(e));
  }

  if (events.empty()) throw EmptyDatasetError();

  ParsedDataset out;
  out.window = window ? *window : TimeWindow{min_ts, max_ts + 1};
  out.rows_outside_window = dropped;

  std::map<std::string, std::vector<CallEvent>> by_ego;
  for (auto& e : events) by_ego[e.ego_id].push_back(std::move(e));
  out.egos.reserve(by_ego.size());
  for (auto& [id, evs] : by_ego) {
    EgoLog log;
    log.ego_id = id;
    log.events = std::move(evs);
    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const CallEvent& a, const CallEvent& b) { return a.timestamp < b.timestamp; });
    log.window = out.window;
    out.egos.push_back(std::move(log));
  }
  return out;
}

ParsedDataset parse_call_log(const std::string& path, std::optional<TimeWindow> window) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return parse_call_log(in, window);
}

void write_call_log(std::span<const EgoLog> egos, std::ostream& out) {
  out << "ego_id,alter_id,timestamp,direction\n";
  for (const auto& ego : egos) {
    for (const auto& e : ego.events) {
      out << e.ego_id << ',' << e.alter_id << ',' << e.timestamp << ',' << to_string(e.direction)
          << '\n';
    }
  }
}

void write_call_log(std::span<const EgoLog> egos, const std::string& path) {
  AtomicFile file(path);
  write_call_log(egos, file.stream());
  file.commit();
}

std::map<std::string, std::vector<CallEvent>> group_pairs(const EgoLog& ego) {
  std::map<std::string, std::vector<CallEvent>> pairs;
  for (const auto& e : ego.events) pairs[e.alter_id].push_back(e);
  return pairs;
}

DatasetSummary summarize(std::span<const EgoLog> egos) {
  if (egos.empty()) throw EmptyDatasetError();
  DatasetSummary s;
  s.n_egos = egos.size();

  std::map<std::int64_t, std::size_t> day_bins;
  std::map<std::int64_t, std::size_t> contact_bins;

  for (const auto& ego : egos) {
    s.n_events += ego.events.size();
    auto pairs = group_pairs(ego);
    s.n_pairs += pairs.size();

    // Active span in days, floored at one day so short logs stay finite.
    double span_days = 1.0;
    if (!ego.events.empty()) {
      double span = static_cast<double>(ego.events.back().timestamp -
                                        ego.events.front().timestamp) /
                    static_cast<double>(kSecondsPerDay);
      span_days = std::max(1.0, span);
    }
    double per_day = static_cast<double>(ego.events.size()) / span_days;
    ++day_bins[static_cast<std::int64_t>(per_day)];

    if (!pairs.empty()) {
      double mean_per_contact =
          static_cast<double>(ego.events.size()) / static_cast<double>(pairs.size());
      ++contact_bins[static_cast<std::int64_t>(mean_per_contact)];
    }
  }

  for (auto [bin, count] : day_bins) {
    s.calls_per_day_pdf[bin] = static_cast<double>(count) / static_cast<double>(s.n_egos);
  }
  std::size_t contact_total = 0;
  for (auto [bin, count] : contact_bins) contact_total += count;
  for (auto [bin, count] : contact_bins) {
    s.mean_calls_per_contact_hist[bin] =
        static_cast<double>(count) / static_cast<double>(contact_total);
  }
  return s;
}

}  // namespace nextcall
