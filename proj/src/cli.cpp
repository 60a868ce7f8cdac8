#include "nextcall/cli.hpp"

#include "nextcall/behavior.hpp"
#include "nextcall/call_data.hpp"
#include "nextcall/classifier.hpp"
#include "nextcall/evaluation.hpp"
#include "nextcall/features.hpp"
#include "nextcall/io.hpp"
#include "nextcall/parallel.hpp"
#include "nextcall/stats.hpp"
#include "nextcall/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace nextcall {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Manifest written next to every subcommand's outputs: resolved flags,
/// content digests of the inputs, and the produced files.
void write_manifest(const std::string& out_dir, const std::string& subcommand, const json& flags,
                    const std::vector<std::string>& inputs, std::vector<std::string> outputs) {
  json m;
  m["tool"] = "nextcall";
  m["format_version"] = 1;
  m["subcommand"] = subcommand;
  m["flags"] = flags;
  json ins = json::array();
  for (const auto& p : inputs) {
    ins.push_back({{"path", p}, {"fnv1a64", to_hex(fnv1a64_file(p))}});
  }
  m["inputs"] = ins;
  std::sort(outputs.begin(), outputs.end());
  m["outputs"] = outputs;

  AtomicFile file((fs::path(out_dir) / "manifest.json").string());
  file.stream() << m.dump(2) << '\n';
  file.commit();
}

std::string join_path(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = std::stoul(item, &pos);
    if (pos != item.size() || v == 0) throw std::invalid_argument("bad k value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("k list is empty");
  return out;
}

std::vector<std::int64_t> parse_minute_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long long v = std::stoll(item, &pos);
    if (pos != item.size() || v < 0) {
      throw std::invalid_argument("bad minutes value '" + item + "'");
    }
    out.push_back(v * kSecondsPerMinute);
  }
  if (out.empty()) throw std::invalid_argument("minutes list is empty");
  return out;
}

std::int64_t parse_time_flag(const std::string& text, const char* flag) {
  auto ts = parse_timestamp(text);
  if (!ts) throw std::invalid_argument(std::string(flag) + ": bad timestamp '" + text + "'");
  return *ts;
}

std::string sanitize_filename(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '.' || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

// ---- ingest ----------------------------------------------------------

struct IngestOpts {
  std::string in;
  std::string out_dir;
  std::string window_start;
  std::string window_end;
};

int run_ingest(const IngestOpts& opt) {
  std::optional<TimeWindow> window;
  if (!opt.window_start.empty()) {
    window = TimeWindow{parse_time_flag(opt.window_start, "--window-start"),
                        parse_time_flag(opt.window_end, "--window-end")};
    if (window->start >= window->end) {
      throw std::invalid_argument("--window-start must precede --window-end");
    }
  }

  ParsedDataset data = parse_call_log(opt.in, window);
  DatasetSummary summary = summarize(data.egos);

  fs::create_directories(opt.out_dir);
  json out;
  out["n_egos"] = summary.n_egos;
  out["n_events"] = summary.n_events;
  out["n_pairs"] = summary.n_pairs;
  out["rows_outside_window"] = data.rows_outside_window;
  out["window"] = {{"start", data.window.start}, {"end", data.window.end}};
  json per_day = json::array();
  for (auto [bin, mass] : summary.calls_per_day_pdf) per_day.push_back({{"bin", bin}, {"mass", mass}});
  out["calls_per_day_pdf"] = per_day;
  json per_contact = json::array();
  for (auto [bin, mass] : summary.mean_calls_per_contact_hist) {
    per_contact.push_back({{"bin", bin}, {"mass", mass}});
  }
  out["mean_calls_per_contact_hist"] = per_contact;

  std::string summary_path = join_path(opt.out_dir, "summary.json");
  {
    AtomicFile file(summary_path);
    file.stream() << out.dump(2) << '\n';
    file.commit();
  }

  json flags{{"in", opt.in},
             {"out_dir", opt.out_dir},
             {"window_start", opt.window_start},
             {"window_end", opt.window_end}};
  write_manifest(opt.out_dir, "ingest", flags, {opt.in}, {summary_path});

  std::cout << "egos " << summary.n_egos << ", events " << summary.n_events << ", pairs "
            << summary.n_pairs << ", dropped " << data.rows_outside_window << '\n';
  return 0;
}

// ---- pretest ---------------------------------------------------------

struct PretestOpts {
  std::string in;
  std::string out_dir;
  int max_lag = 6;
  std::int64_t tz_offset = 0;
  unsigned threads = 0;
};

const char* to_string(PairStatus s) {
  switch (s) {
    case PairStatus::Tested: return "tested";
    case PairStatus::ZeroVariance: return "zero_variance";
    case PairStatus::TooShort: return "too_short";
  }
  return "?";
}

int run_pretest(const PretestOpts& opt) {
  ParsedDataset data = parse_call_log(opt.in);
  Clock clock{opt.tz_offset};
  unsigned threads = opt.threads == 0 ? default_thread_count() : opt.threads;
  PretestReport report = pretest_dataset(data.egos, clock, opt.max_lag, threads);

  fs::create_directories(opt.out_dir);
  std::string pairs_path = join_path(opt.out_dir, "pairs.csv");
  std::string ks_path = join_path(opt.out_dir, "ks.csv");
  std::string summary_path = join_path(opt.out_dir, "summary.csv");

  {
    AtomicFile file(pairs_path);
    auto& out = file.stream();
    out << "ego_id,alter_id,resolution,status,statistic,lags,p_value,reject\n";
    for (const auto& row : report.pairs) {
      out << row.ego_id << ',' << row.alter_id << ',' << nextcall::to_string(row.resolution) << ','
          << to_string(row.status);
      if (row.status == PairStatus::Tested) {
        out << ',' << format_double(row.test.statistic) << ',' << row.test.lags << ','
            << format_double(row.test.p_value) << ',' << (row.test.reject_at_5pct ? 1 : 0);
      } else {
        out << ",,,,";
      }
      out << '\n';
    }
    file.commit();
  }
  {
    AtomicFile file(ks_path);
    auto& out = file.stream();
    out << "ego_id,status,statistic,n,rate,p_value,reject\n";
    for (const auto& row : report.ks) {
      out << row.ego_id << ',' << (row.status == KsStatus::Tested ? "tested" : "too_few_samples");
      if (row.status == KsStatus::Tested) {
        out << ',' << format_double(row.test.statistic) << ',' << row.test.n << ','
            << format_double(row.test.rate) << ',' << format_double(row.test.p_value) << ','
            << (row.test.reject_at_5pct ? 1 : 0);
      } else {
        out << ",,,,,";
      }
      out << '\n';
    }
    file.commit();
  }
  {
    AtomicFile file(summary_path);
    auto& out = file.stream();
    out << "metric,tested,positive,untestable,fraction\n";
    auto line = [&out](const char* name, const ResolutionAggregate& agg) {
      out << name << ',' << agg.tested << ',' << agg.rejected << ',' << agg.untestable << ','
          << format_double(agg.rejected_fraction) << '\n';
    };
    line("hourly_reject", report.hourly);
    line("daily_reject", report.daily);
    line("daytime_hourly_reject", report.daytime_hourly);
    out << "ks_not_reject," << report.ks_tested << ',' << report.ks_not_rejected << ",,"
        << format_double(report.ks_not_rejected_fraction) << '\n';
    file.commit();
  }

  json flags{{"in", opt.in},       {"out_dir", opt.out_dir},   {"max_lag", opt.max_lag},
             {"tz_offset", opt.tz_offset}, {"threads", threads}};
  write_manifest(opt.out_dir, "pretest", flags, {opt.in}, {pairs_path, ks_path, summary_path});

  std::cout << "pairs tested (daily): " << report.daily.tested << ", rejected fraction "
            << format_double(report.daily.rejected_fraction) << "; ego KS kept fraction "
            << format_double(report.ks_not_rejected_fraction) << '\n';
  return 0;
}

// ---- train -----------------------------------------------------------

struct TrainOpts {
  std::string in;
  std::string out_dir;
  EgoModelConfig model;
  TrainOptions train;
  std::int64_t tz_offset = 0;
  unsigned threads = 0;
};

int run_train(const TrainOpts& opt) {
  ParsedDataset data = parse_call_log(opt.in);
  Clock clock{opt.tz_offset};
  unsigned threads = opt.threads == 0 ? default_thread_count() : opt.threads;

  struct Slot {
    bool trained = false;
    std::string skip_reason;
    ModelWeights model;
    double millis = 0.0;
  };
  std::vector<Slot> slots(data.egos.size());

  parallel_for(data.egos.size(), threads, [&](std::size_t i) {
    Slot& slot = slots[i];
    const EgoLog& ego = data.egos[i];
    if (ego.events.size() < opt.model.min_events) {
      slot.skip_reason = "too few events";
      return;
    }
    AlterFilter filter;
    try {
      filter = filter_alters(ego);
    } catch (const NoOutgoingCallsError&) {
      slot.skip_reason = "no outgoing calls";
      return;
    }
    if (filter.class_set.size() < 2) {
      slot.skip_reason = "single class after filtering";
      return;
    }
    FilteredEgo fe = prepare_ego(ego, opt.model);
    FeatureEncoder encoder(fe.class_set, clock);
    TrainingSet ts = make_training_set(fe, encoder);
    if (ts.features.empty()) {
      slot.skip_reason = "no in-class outgoing training calls";
      return;
    }
    auto started = std::chrono::steady_clock::now();
    try {
      slot.model =
          train(ts.features, ts.labels, fe.class_set, encoder.continuous_indices(), opt.train);
    } catch (const SingleClassError&) {
      slot.skip_reason = "single training class";
      return;
    }
    slot.millis =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    slot.trained = true;
  });

  fs::create_directories(opt.out_dir);
  std::vector<std::string> outputs;
  std::string summary_path = join_path(opt.out_dir, "train_summary.csv");
  std::string skipped_path = join_path(opt.out_dir, "train_skipped.csv");

  {
    AtomicFile summary(summary_path);
    summary.stream() << "ego_id,n_train,n_classes,iterations,final_loss,model_file\n";
    AtomicFile skipped(skipped_path);
    skipped.stream() << "ego_id,reason\n";
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& slot = slots[i];
      const auto& ego_id = data.egos[i].ego_id;
      if (!slot.trained) {
        skipped.stream() << ego_id << ',' << slot.skip_reason << '\n';
        continue;
      }
      std::string model_file = sanitize_filename(ego_id) + ".model";
      std::string model_path = join_path(opt.out_dir, model_file.c_str());
      save_model(slot.model, model_path);
      outputs.push_back(model_path);
      summary.stream() << ego_id << ',' << slot.model.meta.n_train << ','
                       << slot.model.n_classes << ',' << slot.model.meta.iterations << ','
                       << format_double(slot.model.meta.final_loss) << ',' << model_file << '\n';
    }
    summary.commit();
    skipped.commit();
  }
  outputs.push_back(summary_path);
  outputs.push_back(skipped_path);

  json flags{{"in", opt.in},
             {"out_dir", opt.out_dir},
             {"min_events", opt.model.min_events},
             {"train_fraction", opt.model.train_fraction},
             {"reg_lambda", opt.train.reg_lambda},
             {"max_iters", opt.train.max_iters},
             {"tol", opt.train.tol},
             {"tz_offset", opt.tz_offset},
             {"threads", threads}};
  write_manifest(opt.out_dir, "train", flags, {opt.in}, std::move(outputs));

  std::size_t trained = 0;
  for (const auto& slot : slots) trained += slot.trained ? 1 : 0;
  std::cout << "trained " << trained << " of " << slots.size() << " egos\n";
  return 0;
}

// ---- evaluate --------------------------------------------------------

struct EvaluateOpts {
  std::string in;
  std::string out_dir;
  EgoModelConfig model;
  TrainOptions train;
  std::string k_list = "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15";
  std::string epsilon_minutes = "15,60,600,1440";
  std::int64_t grid_step_minutes = 15;
  std::int64_t tz_offset = 0;
  unsigned threads = 0;
};

int run_evaluate(const EvaluateOpts& opt) {
  ParsedDataset data = parse_call_log(opt.in);

  EvaluationConfig cfg;
  cfg.model = opt.model;
  cfg.train = opt.train;
  cfg.ks = parse_k_list(opt.k_list);
  cfg.epsilons = parse_minute_list(opt.epsilon_minutes);
  if (opt.grid_step_minutes < 1) throw std::invalid_argument("--grid-step-minutes must be >= 1");
  cfg.grid_step = opt.grid_step_minutes * kSecondsPerMinute;
  cfg.clock = Clock{opt.tz_offset};
  cfg.threads = opt.threads == 0 ? default_thread_count() : opt.threads;

  EvaluationReport report = evaluate_dataset(data.egos, cfg);
  write_evaluation_csvs(report, opt.out_dir);

  json flags{{"in", opt.in},
             {"out_dir", opt.out_dir},
             {"min_events", opt.model.min_events},
             {"train_fraction", opt.model.train_fraction},
             {"reg_lambda", opt.train.reg_lambda},
             {"max_iters", opt.train.max_iters},
             {"tol", opt.train.tol},
             {"k", opt.k_list},
             {"epsilon_minutes", opt.epsilon_minutes},
             {"grid_step_minutes", opt.grid_step_minutes},
             {"tz_offset", opt.tz_offset},
             {"threads", cfg.threads}};
  std::vector<std::string> outputs;
  for (const char* name : {"epsilon_accuracy.csv", "k_sweep.csv", "method_comparison.csv",
                           "per_ego.csv", "skipped.csv"}) {
    outputs.push_back(join_path(opt.out_dir, name));
  }
  write_manifest(opt.out_dir, "evaluate", flags, {opt.in}, std::move(outputs));

  std::cout << "evaluated " << report.n_evaluated << " egos, skipped " << report.n_skipped;
  if (report.n_evaluated > 0) {
    std::cout << "; top-" << report.ks.front() << " accuracy "
              << format_double(report.mean_accuracy[0][0]);
  }
  std::cout << '\n';
  return 0;
}

// ---- synth -----------------------------------------------------------

struct SynthOpts {
  std::string out;
  std::string ground_truth;
  std::string preset = "uniform";
  std::size_t egos = 10;
  std::size_t alters = 8;
  int weeks = 8;
  double base_rate = 22.0;
  double sharpness = 6.0;
  double incoming_fraction = 0.0;
  double missed_fraction = 0.0;
  std::uint64_t seed = 1;
};

int run_synth(const SynthOpts& opt) {
  GeneratorConfig cfg;
  if (opt.preset == "uniform") {
    cfg = GeneratorConfig::uniform(opt.egos, opt.alters, opt.weeks, opt.base_rate, opt.seed);
  } else if (opt.preset == "deterministic") {
    cfg = GeneratorConfig::deterministic(opt.egos, opt.alters, opt.weeks, opt.base_rate, opt.seed);
  } else if (opt.preset == "periodic") {
    cfg = GeneratorConfig::periodic(opt.egos, opt.alters, opt.weeks, opt.base_rate, opt.sharpness,
                                    opt.seed);
  } else if (opt.preset == "mixed") {
    cfg = GeneratorConfig::mixed(opt.egos, opt.alters, opt.weeks, opt.seed);
  } else {
    throw std::invalid_argument("unknown preset '" + opt.preset + "'");
  }
  if (opt.preset != "mixed") {
    cfg.incoming_fraction = opt.incoming_fraction;
    cfg.missed_fraction = opt.missed_fraction;
  }

  SynthResult result = generate(cfg);
  write_call_log(result.egos, opt.out);
  std::vector<std::string> outputs{opt.out};
  if (!opt.ground_truth.empty()) {
    write_ground_truth(result.ground_truth, opt.ground_truth);
    outputs.push_back(opt.ground_truth);
  }

  std::size_t n_events = 0;
  for (const auto& ego : result.egos) n_events += ego.events.size();

  std::string out_dir = fs::path(opt.out).has_parent_path()
                            ? fs::path(opt.out).parent_path().string()
                            : std::string(".");
  json flags{{"out", opt.out},
             {"ground_truth", opt.ground_truth},
             {"preset", opt.preset},
             {"egos", opt.egos},
             {"alters", opt.alters},
             {"weeks", opt.weeks},
             {"base_rate", opt.base_rate},
             {"sharpness", opt.sharpness},
             {"incoming_fraction", cfg.incoming_fraction},
             {"missed_fraction", cfg.missed_fraction},
             {"seed", opt.seed}};
  write_manifest(out_dir, "synth", flags, {}, std::move(outputs));

  std::cout << "wrote " << n_events << " events for " << result.egos.size() << " egos\n";
  return 0;
}

// ---- report ----------------------------------------------------------

struct ReportOpts {
  std::string in_dir;
  std::string out_dir;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

void format_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i];
      if (i + 1 < row.size()) out << std::string(widths[i] - row[i].size() + 2, ' ');
    }
    out << '\n';
  }
}

int run_report(const ReportOpts& opt) {
  std::string out_dir = opt.out_dir.empty() ? (fs::path(opt.in_dir) / "report").string()
                                            : opt.out_dir;
  std::vector<std::string> inputs;
  std::ostringstream text;

  for (const char* name : {"method_comparison.csv", "epsilon_accuracy.csv", "k_sweep.csv"}) {
    std::string path = join_path(opt.in_dir, name);
    auto rows = read_csv(path);
    inputs.push_back(path);
    text << "== " << name << " ==\n";
    format_table(text, rows);
    text << '\n';
  }

  fs::create_directories(out_dir);
  std::string report_path = join_path(out_dir, "report.txt");
  {
    AtomicFile file(report_path);
    file.stream() << text.str();
    file.commit();
  }
  json flags{{"in_dir", opt.in_dir}, {"out_dir", out_dir}};
  write_manifest(out_dir, "report", flags, inputs, {report_path});

  std::cout << text.str();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Call-log modeling tool: screens calling patterns and evaluates "
               "next-call prediction against simple baselines"};
  app.require_subcommand(1);

  IngestOpts ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "Parse a call log and summarize it");
  cmd_ingest->add_option("--in", ingest.in, "Input call log CSV")->required();
  cmd_ingest->add_option("--out-dir", ingest.out_dir, "Output directory")->required();
  auto* ws = cmd_ingest->add_option("--window-start", ingest.window_start,
                                    "Keep only events at or after this time");
  cmd_ingest->add_option("--window-end", ingest.window_end,
                         "Keep only events before this time")
      ->needs(ws);
  ws->needs(cmd_ingest->get_option("--window-end"));

  PretestOpts pretest;
  auto* cmd_pretest =
      app.add_subcommand("pretest", "Run white-noise and exponential-gap screening tests");
  cmd_pretest->add_option("--in", pretest.in, "Input call log CSV")->required();
  cmd_pretest->add_option("--out-dir", pretest.out_dir, "Output directory")->required();
  cmd_pretest->add_option("--max-lag", pretest.max_lag, "Autocorrelation lags")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_pretest->add_option("--tz-offset", pretest.tz_offset, "Seconds east of UTC")
      ->capture_default_str();
  cmd_pretest->add_option("--threads", pretest.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  TrainOpts train_opt;
  auto* cmd_train = app.add_subcommand("train", "Fit per-ego next-call models");
  cmd_train->add_option("--in", train_opt.in, "Input call log CSV")->required();
  cmd_train->add_option("--out-dir", train_opt.out_dir, "Output directory")->required();
  cmd_train->add_option("--min-events", train_opt.model.min_events, "Eligibility floor")
      ->capture_default_str();
  cmd_train->add_option("--train-fraction", train_opt.model.train_fraction,
                        "Chronological train share")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd_train->add_option("--reg-lambda", train_opt.train.reg_lambda, "L2 strength")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd_train->add_option("--max-iters", train_opt.train.max_iters, "Iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_train->add_option("--tol", train_opt.train.tol, "Convergence threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd_train->add_option("--tz-offset", train_opt.tz_offset, "Seconds east of UTC")
      ->capture_default_str();
  cmd_train->add_option("--threads", train_opt.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  EvaluateOpts eval_opt;
  auto* cmd_eval = app.add_subcommand("evaluate", "Score models against baselines");
  cmd_eval->add_option("--in", eval_opt.in, "Input call log CSV")->required();
  cmd_eval->add_option("--out-dir", eval_opt.out_dir, "Output directory")->required();
  cmd_eval->add_option("--min-events", eval_opt.model.min_events, "Eligibility floor")
      ->capture_default_str();
  cmd_eval->add_option("--train-fraction", eval_opt.model.train_fraction,
                       "Chronological train share")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd_eval->add_option("--reg-lambda", eval_opt.train.reg_lambda, "L2 strength")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd_eval->add_option("--max-iters", eval_opt.train.max_iters, "Iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_eval->add_option("--tol", eval_opt.train.tol, "Convergence threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd_eval->add_option("--k", eval_opt.k_list, "Comma-separated list sizes")
      ->capture_default_str();
  cmd_eval->add_option("--epsilon-minutes", eval_opt.epsilon_minutes,
                       "Comma-separated time tolerances")
      ->capture_default_str();
  cmd_eval->add_option("--grid-step-minutes", eval_opt.grid_step_minutes, "Query grid spacing")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_eval->add_option("--tz-offset", eval_opt.tz_offset, "Seconds east of UTC")
      ->capture_default_str();
  cmd_eval->add_option("--threads", eval_opt.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  SynthOpts synth_opt;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic call log");
  cmd_synth->add_option("--out", synth_opt.out, "Output call log CSV")->required();
  cmd_synth->add_option("--ground-truth", synth_opt.ground_truth, "Regime table CSV");
  cmd_synth
      ->add_option("--preset", synth_opt.preset, "uniform | deterministic | periodic | mixed")
      ->check(CLI::IsMember({"uniform", "deterministic", "periodic", "mixed"}))
      ->capture_default_str();
  cmd_synth->add_option("--egos", synth_opt.egos, "Number of egos")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_synth->add_option("--alters", synth_opt.alters, "Alters per ego")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_synth->add_option("--weeks", synth_opt.weeks, "Window length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_synth->add_option("--base-rate", synth_opt.base_rate, "Calls per day per ego")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd_synth->add_option("--sharpness", synth_opt.sharpness, "Daily peak concentration")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd_synth
      ->add_option("--incoming-fraction", synth_opt.incoming_fraction, "Share of incoming events")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd_synth->add_option("--missed-fraction", synth_opt.missed_fraction, "Share of missed events")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd_synth->add_option("--seed", synth_opt.seed, "Generator seed")->capture_default_str();

  ReportOpts report_opt;
  auto* cmd_report = app.add_subcommand("report", "Pretty-print evaluation tables");
  cmd_report->add_option("--in-dir", report_opt.in_dir, "Directory with evaluation CSVs")
      ->required();
  cmd_report->add_option("--out-dir", report_opt.out_dir,
                         "Report directory (default: <in-dir>/report)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }

  try {
    if (app.got_subcommand(cmd_ingest)) return run_ingest(ingest);
    if (app.got_subcommand(cmd_pretest)) return run_pretest(pretest);
    if (app.got_subcommand(cmd_train)) return run_train(train_opt);
    if (app.got_subcommand(cmd_eval)) return run_evaluate(eval_opt);
    if (app.got_subcommand(cmd_synth)) return run_synth(synth_opt);
    if (app.got_subcommand(cmd_report)) return run_report(report_opt);
  } catch (const InvalidConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace nextcall
