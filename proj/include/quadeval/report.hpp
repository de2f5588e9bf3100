#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quadeval/bench_model.hpp"
#include "quadeval/bootstrap.hpp"
#include "quadeval/diagnostics.hpp"
#include "quadeval/metrics.hpp"

namespace quadeval {

struct Provenance {
  std::string manifest_sha256;
  std::map<std::string, std::string> config;
};

struct MetricReport {
  std::string model_id;
  std::size_t scenes = 0;
  std::size_t quadruples = 0;
  ConsistencyScores consistency;
  ClassificationScores classification;
  FailureProfile failure;
  SensitivityScores sensitivity;
  std::map<Category, CategoryScores> per_category;
  std::optional<std::map<std::string, IntervalEstimate>> intervals;
  Provenance provenance;
};

/// Manifest records in id order, one canonical JSON object per line.
std::string canonical_manifest(std::span<const Quadruple> manifest);

std::string sha256_hex(std::string_view bytes);

/// Everything for one model. Intervals are computed only when `bootstrap` is set.
MetricReport build_report(std::span<const Quadruple> manifest, const PredictionTable& table,
                          const std::optional<BootstrapConfig>& bootstrap,
                          const std::string& manifest_digest);

/// One report per table, ordered by model_id; models are evaluated in parallel.
/// Throws std::invalid_argument on duplicate model ids.
std::vector<MetricReport> run_eval(std::span<const Quadruple> manifest,
                                   std::span<const PredictionTable> tables,
                                   const std::optional<BootstrapConfig>& bootstrap);

/// Fraction in [0,1] rendered as a percentage with two decimals.
std::string format_percent(double fraction);
/// "point [lower, upper]" in percent, e.g. "25.85 [24.32, 27.42]".
std::string format_percent_ci(double point, double lower, double upper);

std::string render_report_json(const MetricReport& report);
std::string render_report_csv(const MetricReport& report);

std::string render_ranking_csv(const RankingMatrix& ranking);

enum class PlotKind { radar, failure_composition, alpha_sweep };

std::optional<PlotKind> parse_plot_kind(std::string_view name);

/// Raw rate and its share of the four-rate sum, per failure mode. Shares are
/// empty when the rates are null or all zero.
struct FailureShare {
  std::string mode;
  std::optional<Fraction> raw_rate;
  std::optional<Fraction> normalized_share;
};

std::vector<FailureShare> failure_composition(const FailureProfile& profile);

std::string radar_csv(std::span<const MetricReport> reports);
std::string failure_composition_csv(std::span<const MetricReport> reports);

struct AlphaPoint {
  double alpha = 0.0;
  MetricReport report;
};

std::string alpha_sweep_csv(std::span<const AlphaPoint> points);

}  // namespace quadeval
