#pragma once

#include "nextcall/behavior.hpp"
#include "nextcall/call_data.hpp"
#include "nextcall/classifier.hpp"
#include "nextcall/clock.hpp"
#include "nextcall/features.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nextcall {

enum class Method { TopKRec, TopKFrequent, LastK };

inline constexpr std::array<Method, 3> kAllMethods{Method::TopKRec, Method::TopKFrequent,
                                                   Method::LastK};

const char* to_string(Method m);

struct NoTestCallsError : std::runtime_error {
  explicit NoTestCallsError(const std::string& ego_id);
};

/// Class indices ordered by probability descending; equal probabilities fall
/// back to the lower class index.  Every ranking in this module goes through
/// here.
std::vector<std::size_t> rank_classes(std::span<const double> probs);

/// Encoded training examples for a prepared ego: one row per in-class
/// outgoing training call, with history strictly before the call.  Events
/// sharing a timestamp never see each other.
struct TrainingSet {
  std::vector<std::vector<double>> features;
  std::vector<std::size_t> labels;
};

TrainingSet make_training_set(const FilteredEgo& ego, const FeatureEncoder& encoder);

struct RecommendationList {
  std::int64_t query_time = 0;
  std::vector<std::string> entries;  // alter ids, best first, size <= k
};

/// Model-ranked top-k contacts for a query instant.
RecommendationList topk_recommend(const ModelWeights& model, const FeatureEncoder& encoder,
                                  const HistoryState& history, std::int64_t t, std::size_t k);

/// The k distinct alters contacted most recently before t (any direction),
/// most recent first.
std::vector<std::string> baseline_last_k(std::span<const CallEvent> history, std::int64_t t,
                                         std::size_t k);

/// The k class-set alters with the most outgoing training calls; ties keep
/// class-set order.  Static: independent of the query instant.
std::vector<std::string> baseline_top_frequent(std::span<const CallEvent> train_events,
                                               std::span<const std::string> class_set,
                                               std::size_t k);

/// Fraction of in-class outgoing test calls whose callee appears in the
/// method's top-k list at the call instant.  History at t is every actual
/// event (train or earlier test, any direction) strictly before t.
double topk_accuracy(const FilteredEgo& ego, const ModelWeights& model, Method method,
                     std::size_t k, Clock clock = {});

/// Fraction of in-class outgoing test calls for which some grid instant t'
/// with |t' - t| <= epsilon ranks the callee within the model's top k.  The
/// grid spans the test segment at grid_step spacing, anchored at the first
/// test event.
double epsilon_accuracy(const FilteredEgo& ego, const ModelWeights& model, std::size_t k,
                        std::int64_t epsilon, std::int64_t grid_step = 900, Clock clock = {});

struct EvaluationConfig {
  EgoModelConfig model;
  TrainOptions train;
  std::vector<std::size_t> ks = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  std::vector<std::int64_t> epsilons = {900, 3600, 36000, 86400};  // seconds
  std::int64_t grid_step = 900;
  Clock clock;
  unsigned threads = 1;
};

struct EgoEvaluation {
  std::string ego_id;
  bool skipped = false;
  std::string skip_reason;
  std::size_t n_test_calls = 0;        // in-class outgoing test calls
  std::size_t out_of_class_calls = 0;  // outgoing test calls excluded from denominators
  /// accuracy[method][k index], k indices following EvaluationConfig::ks.
  std::array<std::vector<double>, 3> accuracy;
  /// epsilon_hit[k index][epsilon index].
  std::vector<std::vector<double>> epsilon_hit;
  TrainMeta train_meta;
  double train_millis = 0.0;
};

struct EvaluationReport {
  std::vector<EgoEvaluation> egos;  // ego-id order, one entry per input ego
  std::size_t n_evaluated = 0;
  std::size_t n_skipped = 0;
  std::size_t out_of_class_calls = 0;
  /// Unweighted means over evaluated egos, same shapes as the per-ego fields.
  std::array<std::vector<double>, 3> mean_accuracy;
  std::vector<std::vector<double>> mean_epsilon_hit;
  std::vector<std::size_t> ks;
  std::vector<std::int64_t> epsilons;
};

/// Trains and scores every eligible ego.  Ineligible egos appear with
/// skipped == true and a reason.  Worker threads only fill per-ego slots, so
/// the report is identical for every thread count.
EvaluationReport evaluate_dataset(std::span<const EgoLog> egos, const EvaluationConfig& config);

/// Writes epsilon_accuracy.csv, method_comparison.csv, k_sweep.csv, and
/// per_ego.csv under out_dir.
void write_evaluation_csvs(const EvaluationReport& report, const std::string& out_dir);

}  // namespace nextcall
