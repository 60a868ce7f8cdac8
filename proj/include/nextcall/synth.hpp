#pragma once

#include "nextcall/call_data.hpp"
#include "nextcall/clock.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nextcall {

/// Per-contact calling pattern.
///  - Deterministic: fixed hour-of-week slots, one outgoing call per slot per
///    week, +-5 min jitter.
///  - Periodic: inhomogeneous Poisson with a weekly intensity template that
///    peaks at a contact-specific local hour each day and sags on weekends.
///  - UniformNoise: homogeneous Poisson.
enum class Regime { Deterministic, Periodic, UniformNoise };

const char* to_string(Regime r);

struct AlterSpec {
  Regime regime = Regime::UniformNoise;
  double weekly_rate = 1.0;     // expected events/week; Deterministic: slots/week
  double peak_sharpness = 6.0;  // Periodic only; larger = narrower daily peak
};

struct InvalidConfigError : std::runtime_error {
  explicit InvalidConfigError(const std::string& what);
};

/// 2015-04-19 00:00:00 UTC, a Sunday, so hour-of-week 0 is Sunday midnight.
inline constexpr std::int64_t kSynthEpoch = 1429401600;

struct GeneratorConfig {
  std::size_t n_egos = 1;
  int weeks = 8;
  std::vector<AlterSpec> alters;  // one entry per alter of every ego
  double incoming_fraction = 0.0;
  double missed_fraction = 0.0;
  std::uint64_t seed = 1;
  std::int64_t window_start = kSynthEpoch;

  /// alters x UniformNoise sharing calls_per_day evenly.
  static GeneratorConfig uniform(std::size_t n_egos, std::size_t alters, int weeks,
                                 double calls_per_day, std::uint64_t seed);
  /// alters x Deterministic sharing round(calls_per_day * 7) slots.
  static GeneratorConfig deterministic(std::size_t n_egos, std::size_t alters, int weeks,
                                       double calls_per_day, std::uint64_t seed);
  /// alters x Periodic sharing calls_per_day evenly.
  static GeneratorConfig periodic(std::size_t n_egos, std::size_t alters, int weeks,
                                  double calls_per_day, double sharpness, std::uint64_t seed);
  /// Regular-contacts scenario: five Deterministic alters (two slots each),
  /// one busier Periodic alter, the rest faint UniformNoise.
  static GeneratorConfig mixed(std::size_t n_egos, std::size_t alters, int weeks,
                               std::uint64_t seed);
};

struct GroundTruthRow {
  std::string ego_id;
  std::string alter_id;
  Regime regime = Regime::UniformNoise;
};

struct SynthResult {
  std::vector<EgoLog> egos;
  std::vector<GroundTruthRow> ground_truth;
  TimeWindow window;
};

/// Deterministic in the seed: the same config yields byte-identical CSV
/// output.  Event streams are drawn per (ego, alter), so adding alters or
/// egos never perturbs existing pairs.
SynthResult generate(const GeneratorConfig& config);

/// CSV `ego_id,alter_id,regime`.
void write_ground_truth(std::span<const GroundTruthRow> rows, const std::string& path);

}  // namespace nextcall
