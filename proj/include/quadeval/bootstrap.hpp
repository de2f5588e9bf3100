#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quadeval/bench_model.hpp"
#include "quadeval/metrics.hpp"

namespace quadeval {

struct BootstrapConfig {
  std::uint32_t replicates = 2000;
  double confidence = 0.95;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on replicates == 0 or confidence outside (0,1).
  void validate() const;
};

/// Every scalar the bootstrap re-estimates, in report order.
enum class Metric : std::size_t {
  quad_acc,
  contr_q_pos,
  reject_q_neg,
  contr_v_pos,
  reject_v_neg,
  video_consistency,
  question_consistency,
  balanced_accuracy,
  mcc,
  mcc_score,
  pos_omiss,
  pos_swap,
  neg_hall,
  me_viol,
  vs,
  qs,
  vri,
  gvrs,
  sve,
};

inline constexpr std::size_t kMetricCount = 19;

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

using MetricValues = std::array<std::optional<double>, kMetricCount>;

/// Evaluates every metric on a tally; undefined metrics (null failure rates,
/// null VRI, null balanced accuracy) are empty.
MetricValues metric_values(const OutcomeTally& t);

/// Per-scene tallies, scenes ordered lexicographically by scene_id.
struct SceneCorpus {
  std::vector<std::string> scene_ids;
  std::vector<OutcomeTally> tallies;

  OutcomeTally total() const;
};

/// Groups outcomes by scene. Throws MetricError if an outcome is not in the
/// manifest or a manifest quadruple has no outcome.
SceneCorpus group_by_scene(std::span<const QuadOutcome> outcomes,
                           std::span<const Quadruple> manifest);

/// Draws `out.size()` scene indices in [0, scene_count) with replacement. The
/// draw depends only on (seed, replicate), never on call order or thread.
void resample_scenes(std::uint64_t seed, std::uint64_t replicate, std::size_t scene_count,
                     std::span<std::uint32_t> out);

/// Replicate-by-metric values. Row r is always computed from
/// resample_scenes(seed, r, ...), so both kernels return identical matrices.
using ReplicateMatrix = std::vector<MetricValues>;

ReplicateMatrix bootstrap_replicates(const SceneCorpus& corpus, const BootstrapConfig& config);
ReplicateMatrix bootstrap_replicates_serial(const SceneCorpus& corpus,
                                            const BootstrapConfig& config);

struct IntervalEstimate {
  std::optional<double> point;
  // Both empty when no replicate produced a defined value.
  std::optional<double> lower;
  std::optional<double> upper;
  std::size_t effective_replicates = 0;

  friend bool operator==(const IntervalEstimate&, const IntervalEstimate&) = default;
};

/// Linear interpolation between order statistics of `values` at quantile p.
double percentile(std::vector<double> values, double p);

std::map<std::string, IntervalEstimate> summarize_intervals(const MetricValues& point,
                                                            const ReplicateMatrix& replicates,
                                                            double confidence);

std::map<std::string, IntervalEstimate> bootstrap_metrics(std::span<const QuadOutcome> outcomes,
                                                          std::span<const Quadruple> manifest,
                                                          const BootstrapConfig& config);

/// Called once per (replicate, model) with the scene indices used for that
/// model; lets tests verify that every model sees the same resample.
using ResampleObserver =
    std::function<void(std::size_t replicate, std::size_t model, std::span<const std::uint32_t>)>;

using RankingMatrix = std::map<std::pair<std::string, std::string>, double>;

/// For each ordered pair (A, B) of distinct models, the fraction of
/// replicates in which metric(A) > metric(B), ties counting one half.
RankingMatrix ranking_stability(std::span<const PredictionTable> tables,
                                std::span<const Quadruple> manifest,
                                const BootstrapConfig& config, Metric metric = Metric::quad_acc,
                                const ResampleObserver& observer = {});

}  // namespace quadeval
