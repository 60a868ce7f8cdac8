#include "nextcall/synth.hpp"

#include "nextcall/io.hpp"
#include "nextcall/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace nextcall {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Deterministic: return "deterministic";
    case Regime::Periodic: return "periodic";
    case Regime::UniformNoise: return "uniform_noise";
  }
  return "?";
}

InvalidConfigError::InvalidConfigError(const std::string& what) : std::runtime_error(what) {}

namespace {

// Weekly modulation for Periodic contacts: calls sag on Sunday/Saturday and
// run level on weekdays, so day-scale counts carry structure too.
constexpr double kWeekdayFactor[7] = {0.35, 1.3, 1.3, 1.3, 1.3, 1.3, 0.45};

constexpr double kTwoPi = 6.283185307179586476925287;

std::string ego_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "u%04zu", i + 1);
  return buf;
}

std::string alter_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%02zu", i + 1);
  return buf;
}

void validate(const GeneratorConfig& cfg) {
  if (cfg.n_egos < 1 || cfg.n_egos > 9999) {
    throw InvalidConfigError("n_egos must be in [1, 9999]");
  }
  if (cfg.weeks < 2) throw InvalidConfigError("weeks must be >= 2");
  if (cfg.alters.empty() || cfg.alters.size() > 99) {
    throw InvalidConfigError("alters must number in [1, 99]");
  }
  if (cfg.incoming_fraction < 0.0 || cfg.missed_fraction < 0.0 ||
      cfg.incoming_fraction + cfg.missed_fraction > 1.0) {
    throw InvalidConfigError("direction fractions must be nonnegative and sum to at most 1");
  }
  std::size_t slots = 0;
  for (const auto& a : cfg.alters) {
    if (!(a.weekly_rate >= 0.0)) throw InvalidConfigError("weekly_rate must be >= 0");
    if (a.regime == Regime::Deterministic) {
      slots += static_cast<std::size_t>(std::max<long long>(1, std::llround(a.weekly_rate)));
    }
    if (a.regime == Regime::Periodic && !(a.peak_sharpness >= 0.0)) {
      throw InvalidConfigError("peak_sharpness must be >= 0");
    }
  }
  if (slots > static_cast<std::size_t>(kHoursPerWeek)) {
    throw InvalidConfigError("deterministic slots exceed the 168 hours of a week");
  }
}

Direction draw_direction(Rng& rng, const GeneratorConfig& cfg) {
  double u = rng.uniform();
  if (u < cfg.incoming_fraction) return Direction::Incoming;
  if (u < cfg.incoming_fraction + cfg.missed_fraction) return Direction::Missed;
  return Direction::Outgoing;
}

// Inhomogeneous Poisson stream over [0, weeks*168) hours by thinning against
// the weekly template's maximum.
void generate_poisson(Rng& rng, const GeneratorConfig& cfg, std::span<const double> weekly_template,
                      double peak, int weeks, const std::string& ego_id,
                      const std::string& alter_id, std::vector<CallEvent>& out) {
  double horizon = static_cast<double>(weeks) * kHoursPerWeek;
  double tau = 0.0;
  for (;;) {
    tau += rng.exponential(peak);
    if (tau >= horizon) return;
    int cell = static_cast<int>(std::fmod(tau, static_cast<double>(kHoursPerWeek)));
    if (rng.uniform() * peak <= weekly_template[static_cast<std::size_t>(cell)]) {
      CallEvent e;
      e.ego_id = ego_id;
      e.alter_id = alter_id;
      e.timestamp = cfg.window_start + static_cast<std::int64_t>(tau * kSecondsPerHour);
      e.direction = draw_direction(rng, cfg);
      out.push_back(std::move(e));
    }
  }
}

}  // namespace

GeneratorConfig GeneratorConfig::uniform(std::size_t n_egos, std::size_t alters, int weeks,
                                         double calls_per_day, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.n_egos = n_egos;
  cfg.weeks = weeks;
  cfg.seed = seed;
  cfg.alters.assign(alters, AlterSpec{Regime::UniformNoise,
                                      calls_per_day * 7.0 / static_cast<double>(alters), 0.0});
  return cfg;
}

GeneratorConfig GeneratorConfig::deterministic(std::size_t n_egos, std::size_t alters, int weeks,
                                               double calls_per_day, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.n_egos = n_egos;
  cfg.weeks = weeks;
  cfg.seed = seed;
  double slots = std::max(1.0, std::round(calls_per_day * 7.0 / static_cast<double>(alters)));
  cfg.alters.assign(alters, AlterSpec{Regime::Deterministic, slots, 0.0});
  return cfg;
}

GeneratorConfig GeneratorConfig::periodic(std::size_t n_egos, std::size_t alters, int weeks,
                                          double calls_per_day, double sharpness,
                                          std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.n_egos = n_egos;
  cfg.weeks = weeks;
  cfg.seed = seed;
  cfg.alters.assign(alters, AlterSpec{Regime::Periodic,
                                      calls_per_day * 7.0 / static_cast<double>(alters),
                                      sharpness});
  return cfg;
}

GeneratorConfig GeneratorConfig::mixed(std::size_t n_egos, std::size_t alters, int weeks,
                                       std::uint64_t seed) {
  if (alters < 7) throw InvalidConfigError("mixed preset needs at least 7 alters");
  GeneratorConfig cfg;
  cfg.n_egos = n_egos;
  cfg.weeks = weeks;
  cfg.seed = seed;
  cfg.incoming_fraction = 0.15;
  cfg.missed_fraction = 0.05;
  cfg.alters.reserve(alters);
  for (int i = 0; i < 5; ++i) cfg.alters.push_back({Regime::Deterministic, 2.0, 0.0});
  cfg.alters.push_back({Regime::Periodic, 3.5, 6.0});
  for (std::size_t i = 6; i < alters; ++i) cfg.alters.push_back({Regime::UniformNoise, 0.9, 0.0});
  return cfg;
}

SynthResult generate(const GeneratorConfig& cfg) {
  validate(cfg);

  SynthResult result;
  result.window = TimeWindow{cfg.window_start,
                             cfg.window_start + static_cast<std::int64_t>(cfg.weeks) * kSecondsPerWeek};
  result.egos.reserve(cfg.n_egos);
  result.ground_truth.reserve(cfg.n_egos * cfg.alters.size());

  for (std::size_t e = 0; e < cfg.n_egos; ++e) {
    std::string ego_id = ego_name(e);

    // Hour-of-week slot pool shared by this ego's Deterministic alters;
    // the shuffle keeps slots disjoint across alters.
    std::vector<int> hours(kHoursPerWeek);
    for (int h = 0; h < kHoursPerWeek; ++h) hours[static_cast<std::size_t>(h)] = h;
    Rng ego_rng(derive_seed(cfg.seed, e, 0xff5107ULL));
    for (std::size_t i = hours.size(); i > 1; --i) {
      std::swap(hours[i - 1], hours[ego_rng.index(i)]);
    }
    std::size_t next_slot = 0;

    EgoLog log;
    log.ego_id = ego_id;
    log.window = result.window;

    for (std::size_t a = 0; a < cfg.alters.size(); ++a) {
      const AlterSpec& spec = cfg.alters[a];
      std::string alter_id = alter_name(a);
      result.ground_truth.push_back({ego_id, alter_id, spec.regime});

      Rng rng(derive_seed(cfg.seed, e, a + 1));

      switch (spec.regime) {
        case Regime::Deterministic: {
          auto n_slots =
              static_cast<std::size_t>(std::max<long long>(1, std::llround(spec.weekly_rate)));
          std::vector<int> slots(hours.begin() + static_cast<std::ptrdiff_t>(next_slot),
                                 hours.begin() + static_cast<std::ptrdiff_t>(next_slot + n_slots));
          next_slot += n_slots;
          for (int w = 0; w < cfg.weeks; ++w) {
            for (int h : slots) {
              CallEvent ev;
              ev.ego_id = ego_id;
              ev.alter_id = alter_id;
              std::int64_t center = cfg.window_start + static_cast<std::int64_t>(w) * kSecondsPerWeek +
                                    static_cast<std::int64_t>(h) * kSecondsPerHour + 1800;
              ev.timestamp = center + std::llround(rng.uniform(-300.0, 300.0));
              ev.direction = Direction::Outgoing;
              log.events.push_back(std::move(ev));
            }
          }
          break;
        }
        case Regime::Periodic: {
          if (spec.weekly_rate > 0.0) {
            double peak_hour = rng.uniform(0.0, 24.0);
            std::vector<double> weekly(kHoursPerWeek);
            double total = 0.0;
            for (int h = 0; h < kHoursPerWeek; ++h) {
              double hod = static_cast<double>(h % 24) + 0.5;
              double circadian = std::exp(spec.peak_sharpness * std::cos(kTwoPi * (hod - peak_hour) / 24.0));
              weekly[static_cast<std::size_t>(h)] = circadian * kWeekdayFactor[(h / 24) % 7];
              total += weekly[static_cast<std::size_t>(h)];
            }
            double peak = 0.0;
            for (auto& v : weekly) {
              v *= spec.weekly_rate / total;
              peak = std::max(peak, v);
            }
            generate_poisson(rng, cfg, weekly, peak, cfg.weeks, ego_id, alter_id, log.events);
          }
          break;
        }
        case Regime::UniformNoise: {
          if (spec.weekly_rate > 0.0) {
            std::vector<double> weekly(kHoursPerWeek, spec.weekly_rate / kHoursPerWeek);
            generate_poisson(rng, cfg, weekly, weekly[0], cfg.weeks, ego_id, alter_id, log.events);
          }
          break;
        }
      }
    }

    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const CallEvent& x, const CallEvent& y) { return x.timestamp < y.timestamp; });
    result.egos.push_back(std::move(log));
  }
  return result;
}

void write_ground_truth(std::span<const GroundTruthRow> rows, const std::string& path) {
  AtomicFile file(path);
  auto& out = file.stream();
  out << "ego_id,alter_id,regime\n";
  for (const auto& row : rows) {
    out << row.ego_id << ',' << row.alter_id << ',' << to_string(row.regime) << '\n';
  }
  file.commit();
}

}  // namespace nextcall
