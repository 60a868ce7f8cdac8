#include "nextcall/synth.hpp"

#include "nextcall/clock.hpp"
#include "nextcall/stats.hpp"
#include "tmpdir.hpp"

#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace nextcall;

namespace {

std::string render(const SynthResult& r) {
  std::ostringstream out;
  write_call_log(r.egos, out);
  return out.str();
}

std::vector<CallEvent> pair_events(const EgoLog& ego, const std::string& alter) {
  std::vector<CallEvent> out;
  for (const auto& e : ego.events) {
    if (e.alter_id == alter) out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  auto cfg = GeneratorConfig::uniform(3, 4, 4, 6.0, 42);
  CHECK(render(generate(cfg)) == render(generate(cfg)));

  auto other = GeneratorConfig::uniform(3, 4, 4, 6.0, 43);
  CHECK(render(generate(cfg)) != render(generate(other)));
}

TEST_CASE("shape of the generated dataset") {
  auto cfg = GeneratorConfig::uniform(3, 4, 5, 6.0, 7);
  auto r = generate(cfg);
  REQUIRE(r.egos.size() == 3);
  CHECK(r.egos[0].ego_id == "u0001");
  CHECK(r.egos[2].ego_id == "u0003");
  CHECK(r.ground_truth.size() == 12);
  CHECK(r.window.start == kSynthEpoch);
  CHECK(r.window.end == kSynthEpoch + 5 * kSecondsPerWeek);

  std::set<std::string> alters;
  for (const auto& ego : r.egos) {
    CHECK(ego.window == r.window);
    for (std::size_t i = 1; i < ego.events.size(); ++i) {
      CHECK(ego.events[i - 1].timestamp <= ego.events[i].timestamp);
    }
    for (const auto& e : ego.events) {
      CHECK(e.ego_id == ego.ego_id);
      CHECK(r.window.contains(e.timestamp));
      alters.insert(e.alter_id);
    }
  }
  for (const auto& a : alters) {
    CHECK((a == "c01" || a == "c02" || a == "c03" || a == "c04"));
  }
}

TEST_CASE("total event volume tracks the configured rate") {
  auto r = generate(GeneratorConfig::uniform(40, 6, 4, 10.0, 77));
  std::size_t total = 0;
  for (const auto& ego : r.egos) total += ego.events.size();
  // expectation 40 egos * 10 calls/day * 28 days = 11200
  CHECK(total > 11200 * 0.95);
  CHECK(total < 11200 * 1.05);
}

TEST_CASE("deterministic contacts ring on fixed weekly slots") {
  auto cfg = GeneratorConfig::deterministic(2, 3, 6, 6.0, 13);
  // 6 calls/day * 7 / 3 alters = 14 slots per alter
  auto r = generate(cfg);
  for (const auto& ego : r.egos) {
    std::set<int> used_hours;
    for (std::size_t a = 1; a <= 3; ++a) {
      char name[8];
      std::snprintf(name, sizeof name, "c%02zu", a);
      auto events = pair_events(ego, name);
      CHECK(events.size() == 14 * 6);

      std::map<int, int> per_hour;  // hour of week -> events
      for (const auto& e : events) {
        CHECK(e.direction == Direction::Outgoing);
        std::int64_t within_week = floor_mod(e.timestamp - kSynthEpoch, kSecondsPerWeek);
        int hour = static_cast<int>(within_week / kSecondsPerHour);
        std::int64_t offset = within_week - static_cast<std::int64_t>(hour) * kSecondsPerHour;
        // center of the hour +- 5 minutes
        CHECK(offset >= 1500);
        CHECK(offset <= 2100);
        ++per_hour[hour];
      }
      CHECK(per_hour.size() == 14);
      for (const auto& [hour, count] : per_hour) {
        CHECK(count == 6);  // one call per week per slot
        // slots never collide across the ego's deterministic alters
        CHECK(used_hours.insert(hour).second);
      }
    }
  }
}

TEST_CASE("deterministic contacts stay outgoing even with direction fractions") {
  auto cfg = GeneratorConfig::deterministic(1, 2, 4, 4.0, 3);
  cfg.incoming_fraction = 0.5;
  cfg.missed_fraction = 0.3;
  auto r = generate(cfg);
  REQUIRE(!r.egos[0].events.empty());
  for (const auto& e : r.egos[0].events) CHECK(e.direction == Direction::Outgoing);
}

TEST_CASE("direction fractions shape the generated mix") {
  auto cfg = GeneratorConfig::uniform(2, 4, 8, 20.0, 15);
  cfg.incoming_fraction = 0.3;
  cfg.missed_fraction = 0.1;
  auto r = generate(cfg);
  std::size_t n = 0, incoming = 0, missed = 0;
  for (const auto& ego : r.egos) {
    for (const auto& e : ego.events) {
      ++n;
      if (e.direction == Direction::Incoming) ++incoming;
      if (e.direction == Direction::Missed) ++missed;
    }
  }
  REQUIRE(n > 1500);
  CHECK(static_cast<double>(incoming) / n == doctest::Approx(0.3).epsilon(0.15));
  CHECK(static_cast<double>(missed) / n == doctest::Approx(0.1).epsilon(0.3));
}

TEST_CASE("appending egos or alters never perturbs existing pairs") {
  auto base = GeneratorConfig::uniform(2, 3, 4, 6.0, 99);
  auto r_base = generate(base);

  auto more_egos = base;
  more_egos.n_egos = 4;
  auto r_egos = generate(more_egos);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r_egos.egos[i].events == r_base.egos[i].events);
  }

  auto more_alters = base;
  more_alters.alters.push_back({Regime::UniformNoise, 2.0, 0.0});
  auto r_alters = generate(more_alters);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t a = 1; a <= 3; ++a) {
      char name[8];
      std::snprintf(name, sizeof name, "c%02zu", a);
      CHECK(pair_events(r_alters.egos[i], name) == pair_events(r_base.egos[i], name));
    }
  }
}

TEST_CASE("periodic traffic fails white-noise screening") {
  auto r = generate(GeneratorConfig::periodic(4, 4, 26, 16.0, 8.0, 31));
  auto report = pretest_dataset(r.egos);
  REQUIRE(report.hourly.tested >= 14);
  CHECK(report.hourly.rejected_fraction > 0.9);
  CHECK(report.daily.rejected_fraction > 0.9);
  // clustered gaps are far from exponential
  CHECK(report.ks_not_rejected_fraction < 0.5);
}

TEST_CASE("homogeneous traffic passes screening at roughly nominal size") {
  auto r = generate(GeneratorConfig::uniform(100, 5, 15, 5.0, 8));
  auto report = pretest_dataset(r.egos, Clock{}, 6, 4);
  REQUIRE(report.daily.tested >= 450);
  CHECK(report.daily.rejected_fraction > 0.015);
  CHECK(report.daily.rejected_fraction < 0.10);
  CHECK(report.hourly.rejected_fraction > 0.015);
  CHECK(report.hourly.rejected_fraction < 0.10);
  // superposed homogeneous streams have exponential inter-event gaps
  CHECK(report.ks_not_rejected_fraction > 0.85);
}

TEST_CASE("mixed preset composition") {
  auto cfg = GeneratorConfig::mixed(2, 9, 8, 5);
  CHECK(cfg.incoming_fraction == doctest::Approx(0.15));
  CHECK(cfg.missed_fraction == doctest::Approx(0.05));
  REQUIRE(cfg.alters.size() == 9);
  for (int i = 0; i < 5; ++i) CHECK(cfg.alters[i].regime == Regime::Deterministic);
  CHECK(cfg.alters[5].regime == Regime::Periodic);
  for (std::size_t i = 6; i < 9; ++i) CHECK(cfg.alters[i].regime == Regime::UniformNoise);
  CHECK_THROWS_AS(GeneratorConfig::mixed(2, 6, 8, 5), InvalidConfigError);

  auto r = generate(cfg);
  REQUIRE(r.ground_truth.size() == 18);
  CHECK(r.ground_truth[0].regime == Regime::Deterministic);
  CHECK(r.ground_truth[5].regime == Regime::Periodic);
  CHECK(r.ground_truth[8].regime == Regime::UniformNoise);
}

TEST_CASE("config validation") {
  auto ok = GeneratorConfig::uniform(1, 2, 4, 4.0, 1);
  CHECK_NOTHROW(generate(ok));

  auto bad = ok;
  bad.n_egos = 0;
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
  bad = ok;
  bad.n_egos = 10000;
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
  bad = ok;
  bad.weeks = 1;
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
  bad = ok;
  bad.alters.clear();
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
  bad = ok;
  bad.alters.assign(100, AlterSpec{});
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
  bad = ok;
  bad.incoming_fraction = -0.1;
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
  bad = ok;
  bad.incoming_fraction = 0.7;
  bad.missed_fraction = 0.4;
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
  bad = ok;
  bad.alters = {{Regime::Deterministic, 100.0, 0.0}, {Regime::Deterministic, 100.0, 0.0}};
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
  bad = ok;
  bad.alters = {{Regime::UniformNoise, -1.0, 0.0}};
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
  bad = ok;
  bad.alters = {{Regime::Periodic, 3.0, -1.0}};
  CHECK_THROWS_AS(generate(bad), InvalidConfigError);
}

TEST_CASE("zero-rate contacts appear in the ground truth but not the log") {
  GeneratorConfig cfg;
  cfg.n_egos = 1;
  cfg.weeks = 2;
  cfg.alters = {{Regime::UniformNoise, 5.0, 0.0}, {Regime::UniformNoise, 0.0, 0.0}};
  auto r = generate(cfg);
  REQUIRE(r.ground_truth.size() == 2);
  CHECK(pair_events(r.egos[0], "c02").empty());
  CHECK(!pair_events(r.egos[0], "c01").empty());
}

TEST_CASE("ground truth file format") {
  testutil::TmpDir tmp("synth_gt");
  auto r = generate(GeneratorConfig::mixed(1, 7, 2, 4));
  auto path = tmp.str("gt.csv");
  write_ground_truth(r.ground_truth, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "ego_id,alter_id,regime");
  std::getline(in, line);
  CHECK(line == "u0001,c01,deterministic");
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == r.ground_truth.size());
}
