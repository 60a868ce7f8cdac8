#include "nextcall/stats.hpp"

#include "nextcall/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace nextcall {

const char* to_string(Resolution r) {
  switch (r) {
    case Resolution::Hourly: return "hourly";
    case Resolution::Daily: return "daily";
    case Resolution::DaytimeHourly: return "daytime_hourly";
  }
  return "?";
}

ZeroVarianceError::ZeroVarianceError() : std::runtime_error("series has zero variance") {}
LagTooLargeError::LagTooLargeError(std::size_t lag, std::size_t n)
    : std::runtime_error("lag " + std::to_string(lag) + " out of range for series of length " +
                         std::to_string(n)) {}
SeriesTooShortError::SeriesTooShortError(std::size_t n)
    : std::runtime_error("series of length " + std::to_string(n) +
                         " is too short for a portmanteau test") {}
TooFewSamplesError::TooFewSamplesError(std::size_t n)
    : std::runtime_error("need at least 3 samples, got " + std::to_string(n)) {}
NonPositiveSampleError::NonPositiveSampleError()
    : std::runtime_error("samples must be strictly positive") {}
EmptyWindowError::EmptyWindowError()
    : std::runtime_error("window contains no bins at this resolution") {}

namespace {

constexpr int kDayStartHour = 7;
constexpr int kDayEndHour = 20;  // exclusive
constexpr int kDaytimeBinsPerDay = kDayEndHour - kDayStartHour;

// Index of the daytime-hour bin containing local hour grid cell `hour_cell`
// (hours since epoch, local), counting only hours in [07, 20).  The cell must
// be a daytime cell.
std::int64_t daytime_index(std::int64_t day, int hour_of_day) {
  return day * kDaytimeBinsPerDay + (hour_of_day - kDayStartHour);
}

// First daytime bin whose interval intersects [start, ...), as a daytime
// index.
std::int64_t first_daytime_bin(std::int64_t local_start) {
  std::int64_t day = floor_div(local_start, kSecondsPerDay);
  int hour = static_cast<int>(floor_mod(local_start, kSecondsPerDay) / kSecondsPerHour);
  if (hour < kDayStartHour) return daytime_index(day, kDayStartHour);
  if (hour >= kDayEndHour) return daytime_index(day + 1, kDayStartHour);
  return daytime_index(day, hour);
}

// Last daytime bin whose interval intersects (..., end), end exclusive.
std::int64_t last_daytime_bin(std::int64_t local_end) {
  std::int64_t last_instant = local_end - 1;
  std::int64_t day = floor_div(last_instant, kSecondsPerDay);
  int hour = static_cast<int>(floor_mod(last_instant, kSecondsPerDay) / kSecondsPerHour);
  if (hour < kDayStartHour) return daytime_index(day - 1, kDayEndHour - 1);
  if (hour >= kDayEndHour) return daytime_index(day, kDayEndHour - 1);
  return daytime_index(day, hour);
}

}  // namespace

PairSeries bin_series(std::span<const CallEvent> events, Resolution resolution, TimeWindow window,
                      Clock clock) {
  if (window.start >= window.end) throw EmptyWindowError();

  PairSeries out;
  if (!events.empty()) {
    out.ego_id = events.front().ego_id;
    out.alter_id = events.front().alter_id;
  }
  out.resolution = resolution;

  if (resolution == Resolution::Hourly || resolution == Resolution::Daily) {
    std::int64_t width = resolution == Resolution::Hourly ? kSecondsPerHour : kSecondsPerDay;
    std::int64_t first = floor_div(clock.local(window.start), width);
    std::int64_t last = floor_div(clock.local(window.end - 1), width);
    out.counts.assign(static_cast<std::size_t>(last - first + 1), 0);
    for (const auto& e : events) {
      if (!window.contains(e.timestamp)) continue;
      std::int64_t bin = floor_div(clock.local(e.timestamp), width) - first;
      ++out.counts[static_cast<std::size_t>(bin)];
    }
    return out;
  }

  std::int64_t first = first_daytime_bin(clock.local(window.start));
  std::int64_t last = last_daytime_bin(clock.local(window.end));
  if (last < first) throw EmptyWindowError();
  out.counts.assign(static_cast<std::size_t>(last - first + 1), 0);
  for (const auto& e : events) {
    if (!window.contains(e.timestamp)) continue;
    std::int64_t local = clock.local(e.timestamp);
    int hour = static_cast<int>(floor_mod(local, kSecondsPerDay) / kSecondsPerHour);
    if (hour < kDayStartHour || hour >= kDayEndHour) continue;
    std::int64_t bin = daytime_index(floor_div(local, kSecondsPerDay), hour) - first;
    ++out.counts[static_cast<std::size_t>(bin)];
  }
  return out;
}

double autocorrelation(std::span<const double> series, std::size_t lag) {
  std::size_t n = series.size();
  if (lag >= n) throw LagTooLargeError(lag, n);

  double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0;
  for (double x : series) denom += (x - mean) * (x - mean);
  if (denom == 0.0) throw ZeroVarianceError();
  if (lag == 0) return 1.0;

  double num = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) {
    num += (series[t] - mean) * (series[t + lag] - mean);
  }
  return num / denom;
}

QTestResult ljung_box(std::span<const double> series, int max_lag) {
  if (max_lag < 1) throw std::invalid_argument("max_lag must be >= 1");
  std::size_t n = series.size();
  if (n < 4) throw SeriesTooShortError(n);
  int m = static_cast<int>(std::min(static_cast<std::size_t>(max_lag), n / 4));

  double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0;
  for (double x : series) denom += (x - mean) * (x - mean);
  if (denom == 0.0) throw ZeroVarianceError();

  double q = 0.0;
  for (int k = 1; k <= m; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(k) < n; ++t) {
      num += (series[t] - mean) * (series[t + static_cast<std::size_t>(k)] - mean);
    }
    double r = num / denom;
    q += r * r / static_cast<double>(n - static_cast<std::size_t>(k));
  }
  q *= static_cast<double>(n) * static_cast<double>(n + 2);

  QTestResult out;
  out.statistic = q;
  out.lags = m;
  out.p_value = chi_square_sf(q, m);
  out.reject_at_5pct = out.p_value < 0.05;
  return out;
}

namespace {

// Regularized incomplete gamma, lower tail by series, upper tail by
// continued fraction (Lentz).  a > 0, x >= 0.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double chi_square_sf(double x, int df) {
  if (df < 1) throw std::invalid_argument("df must be >= 1");
  if (x < 0.0) throw std::invalid_argument("x must be >= 0");
  if (x == 0.0) return 1.0;
  double a = 0.5 * static_cast<double>(df);
  double xx = 0.5 * x;
  double q = xx < a + 1.0 ? 1.0 - gamma_p_series(a, xx) : gamma_q_contfrac(a, xx);
  return std::clamp(q, 0.0, 1.0);
}

double kolmogorov_sf(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.75) {
    // Dual theta series for the CDF; the alternating form converges slowly
    // near zero.
    double cdf = 0.0;
    for (int j = 1; j <= 20; ++j) {
      double a = (2.0 * j - 1.0) * 3.14159265358979323846;
      double term = std::exp(-a * a / (8.0 * t * t));
      cdf += term;
      if (term < 1e-12) break;
    }
    cdf *= std::sqrt(2.0 * 3.14159265358979323846) / t;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    double term = std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) * t * t);
    sum += sign * term;
    if (term < 1e-10) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

KsResult ks_against_rate(std::span<const double> samples, double rate) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  std::size_t n = sorted.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = -std::expm1(-rate * sorted[i]);
    double hi = static_cast<double>(i + 1) / static_cast<double>(n) - f;
    double lo = f - static_cast<double>(i) / static_cast<double>(n);
    d = std::max({d, hi, lo});
  }

  KsResult out;
  out.statistic = d;
  out.n = n;
  out.rate = rate;
  out.p_value = kolmogorov_sf(std::sqrt(static_cast<double>(n)) * d);
  out.reject_at_5pct = out.p_value < 0.05;
  return out;
}

}  // namespace

KsResult ks_exponential(std::span<const double> samples) {
  if (samples.size() < 3) throw TooFewSamplesError(samples.size());
  double sum = 0.0;
  for (double x : samples) {
    if (!(x > 0.0)) throw NonPositiveSampleError();
    sum += x;
  }
  return ks_against_rate(samples, static_cast<double>(samples.size()) / sum);
}

KsResult ks_exponential_with_rate(std::span<const double> samples, double rate) {
  if (samples.size() < 3) throw TooFewSamplesError(samples.size());
  if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
  for (double x : samples) {
    if (!(x > 0.0)) throw NonPositiveSampleError();
  }
  return ks_against_rate(samples, rate);
}

namespace {

constexpr Resolution kResolutions[] = {Resolution::Hourly, Resolution::Daily,
                                       Resolution::DaytimeHourly};

struct EgoPretest {
  std::vector<PairTestRow> pairs;
  std::optional<EgoKsRow> ks;
};

EgoPretest pretest_ego(const EgoLog& ego, Clock clock, int max_lag) {
  EgoPretest out;
  auto pairs = group_pairs(ego);

  for (const auto& [alter_id, events] : pairs) {
    for (Resolution res : kResolutions) {
      PairTestRow row;
      row.ego_id = ego.ego_id;
      row.alter_id = alter_id;
      row.resolution = res;

      PairSeries series = bin_series(events, res, ego.window, clock);
      series.ego_id = ego.ego_id;
      series.alter_id = alter_id;
      if (series.counts.size() < 4) {
        row.status = PairStatus::TooShort;
      } else {
        std::vector<double> xs(series.counts.begin(), series.counts.end());
        bool constant = std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs[0]; });
        if (constant) {
          row.status = PairStatus::ZeroVariance;
        } else {
          row.status = PairStatus::Tested;
          row.test = ljung_box(xs, max_lag);
        }
      }
      out.pairs.push_back(std::move(row));
    }
  }

  // Inter-event times of the whole ego stream; same-second neighbors yield
  // zero gaps, which the exponential model excludes, so they are skipped.
  std::vector<double> gaps;
  gaps.reserve(ego.events.size());
  for (std::size_t i = 1; i < ego.events.size(); ++i) {
    std::int64_t gap = ego.events[i].timestamp - ego.events[i - 1].timestamp;
    if (gap > 0) gaps.push_back(static_cast<double>(gap));
  }
  EgoKsRow ks_row;
  ks_row.ego_id = ego.ego_id;
  if (gaps.size() < 3) {
    ks_row.status = KsStatus::TooFewSamples;
  } else {
    ks_row.status = KsStatus::Tested;
    ks_row.test = ks_exponential(gaps);
  }
  out.ks = std::move(ks_row);
  return out;
}

}  // namespace

PretestReport pretest_dataset(std::span<const EgoLog> egos, Clock clock, int max_lag,
                              unsigned threads) {
  std::vector<EgoPretest> slots(egos.size());
  parallel_for(egos.size(), threads,
               [&](std::size_t i) { slots[i] = pretest_ego(egos[i], clock, max_lag); });

  PretestReport report;
  auto aggregate_of = [&report](Resolution res) -> ResolutionAggregate& {
    switch (res) {
      case Resolution::Hourly: return report.hourly;
      case Resolution::Daily: return report.daily;
      default: return report.daytime_hourly;
    }
  };

  for (auto& slot : slots) {
    for (auto& row : slot.pairs) {
      auto& agg = aggregate_of(row.resolution);
      if (row.status == PairStatus::Tested) {
        ++agg.tested;
        if (row.test.reject_at_5pct) ++agg.rejected;
      } else {
        ++agg.untestable;
      }
      report.pairs.push_back(std::move(row));
    }
    if (slot.ks) {
      if (slot.ks->status == KsStatus::Tested) {
        ++report.ks_tested;
        if (!slot.ks->test.reject_at_5pct) ++report.ks_not_rejected;
      }
      report.ks.push_back(std::move(*slot.ks));
    }
  }

  for (auto* agg : {&report.hourly, &report.daily, &report.daytime_hourly}) {
    agg->rejected_fraction =
        agg->tested == 0 ? 0.0
                         : static_cast<double>(agg->rejected) / static_cast<double>(agg->tested);
  }
  report.ks_not_rejected_fraction =
      report.ks_tested == 0
          ? 0.0
          : static_cast<double>(report.ks_not_rejected) / static_cast<double>(report.ks_tested);
  return report;
}

}  // namespace nextcall
