#pragma once

#include "nextcall/call_data.hpp"
#include "nextcall/clock.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nextcall {

enum class Resolution { Hourly, Daily, DaytimeHourly };

const char* to_string(Resolution r);

/// Event counts for one ego-alter pair on a fixed grid covering the
/// observation window.  DaytimeHourly keeps only local hours in [07, 20),
/// 13 bins per day.
struct PairSeries {
  std::string ego_id;
  std::string alter_id;
  Resolution resolution = Resolution::Daily;
  std::vector<int> counts;
};

struct QTestResult {
  double statistic = 0.0;
  int lags = 0;
  double p_value = 1.0;
  bool reject_at_5pct = false;
};

struct KsResult {
  double statistic = 0.0;
  std::size_t n = 0;
  double rate = 0.0;  // exponential rate the sample was tested against
  double p_value = 1.0;
  bool reject_at_5pct = false;
};

struct ZeroVarianceError : std::runtime_error {
  ZeroVarianceError();
};
struct LagTooLargeError : std::runtime_error {
  LagTooLargeError(std::size_t lag, std::size_t n);
};
struct SeriesTooShortError : std::runtime_error {
  explicit SeriesTooShortError(std::size_t n);
};
struct TooFewSamplesError : std::runtime_error {
  explicit TooFewSamplesError(std::size_t n);
};
struct NonPositiveSampleError : std::runtime_error {
  NonPositiveSampleError();
};
struct EmptyWindowError : std::runtime_error {
  EmptyWindowError();
};

PairSeries bin_series(std::span<const CallEvent> events, Resolution resolution,
                      TimeWindow window, Clock clock = {});

/// Sample autocorrelation at the given lag,
///   r_k = sum_t (x_t - xbar)(x_{t+k} - xbar) / sum_t (x_t - xbar)^2.
/// r_0 == 1 by definition.  Throws LagTooLargeError for lag >= n and
/// ZeroVarianceError for constant series.
double autocorrelation(std::span<const double> series, std::size_t lag);

/// Portmanteau white-noise test,
///   Q = n(n+2) * sum_{k=1..m} r_k^2 / (n-k),
/// with Q ~ chi-square(m) under the null.  The requested lag count is capped
/// at n/4; series with n < 4 throw SeriesTooShortError.
QTestResult ljung_box(std::span<const double> series, int max_lag = 6);

/// Upper tail of the chi-square distribution via the regularized incomplete
/// gamma function; absolute error below 1e-8.
double chi_square_sf(double x, int df);

/// Kolmogorov limit distribution tail Pr(K > t) = 2 sum_j (-1)^{j-1} exp(-2 j^2 t^2),
/// truncated when terms drop below 1e-10, clamped to [0, 1].
double kolmogorov_sf(double t);

/// One-sample Kolmogorov-Smirnov test against Exponential(rate) with the rate
/// fit by maximum likelihood (1 / sample mean).  Requires n >= 3 strictly
/// positive samples.  The p-value uses the asymptotic distribution of
/// sqrt(n) * D.
KsResult ks_exponential(std::span<const double> samples);

/// Same test against a caller-supplied rate (no fitting step).
KsResult ks_exponential_with_rate(std::span<const double> samples, double rate);

enum class PairStatus { Tested, ZeroVariance, TooShort };
enum class KsStatus { Tested, TooFewSamples };

struct PairTestRow {
  std::string ego_id;
  std::string alter_id;
  Resolution resolution = Resolution::Daily;
  PairStatus status = PairStatus::Tested;
  QTestResult test;  // valid only when status == Tested
};

struct EgoKsRow {
  std::string ego_id;
  KsStatus status = KsStatus::Tested;
  KsResult test;  // valid only when status == Tested
};

struct ResolutionAggregate {
  std::size_t tested = 0;
  std::size_t rejected = 0;
  std::size_t untestable = 0;
  double rejected_fraction = 0.0;  // rejected / tested
};

/// Dataset-level screening: per-pair white-noise tests at every resolution
/// plus a per-ego KS test of inter-event times (seconds between consecutive
/// events of the ego) against the fitted exponential.
struct PretestReport {
  std::vector<PairTestRow> pairs;
  std::vector<EgoKsRow> ks;
  ResolutionAggregate hourly;
  ResolutionAggregate daily;
  ResolutionAggregate daytime_hourly;
  std::size_t ks_tested = 0;
  std::size_t ks_not_rejected = 0;
  double ks_not_rejected_fraction = 0.0;
};

PretestReport pretest_dataset(std::span<const EgoLog> egos, Clock clock = {},
                              int max_lag = 6, unsigned threads = 1);

}  // namespace nextcall
