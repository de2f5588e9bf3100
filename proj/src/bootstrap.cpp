#include "quadeval/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "quadeval/diagnostics.hpp"

namespace quadeval {

void BootstrapConfig::validate() const {
  if (replicates == 0) throw std::invalid_argument("replicates must be at least 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie strictly between 0 and 1");
  }
}

namespace {

constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "quad_acc",     "contr_q_pos", "reject_q_neg", "contr_v_pos",       "reject_v_neg",
    "video_consistency", "question_consistency", "balanced_accuracy", "mcc", "mcc_score",
    "pos_omiss",    "pos_swap",    "neg_hall",     "me_viol",           "vs",
    "qs",           "vri",         "gvrs",         "sve"};

std::optional<double> value_of(const std::optional<Fraction>& f) {
  if (!f) return std::nullopt;
  return f->to_double();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based stream: word i of replicate r is a pure function of (seed, r, i).
class ReplicateStream {
public:
  ReplicateStream(std::uint64_t seed, std::uint64_t replicate)
      : key_(splitmix64(seed ^ splitmix64(replicate + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Lemire's unbiased bounded draw.
  std::uint32_t below(std::uint32_t bound) {
    std::uint64_t x = next() >> 32;
    std::uint64_t m = x * bound;
    auto low = static_cast<std::uint32_t>(m);
    if (low < bound) {
      std::uint32_t threshold = static_cast<std::uint32_t>(-bound) % bound;
      while (low < threshold) {
        x = next() >> 32;
        m = x * bound;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

OutcomeTally resampled_tally(const SceneCorpus& corpus, std::span<const std::uint32_t> indices) {
  OutcomeTally t;
  for (std::uint32_t i : indices) t += corpus.tallies[i];
  return t;
}

void compute_row(const SceneCorpus& corpus, const BootstrapConfig& config, std::size_t r,
                 std::vector<std::uint32_t>& scratch, MetricValues& row) {
  resample_scenes(config.seed, r, corpus.tallies.size(), scratch);
  row = metric_values(resampled_tally(corpus, scratch));
}

void require_scenes(const SceneCorpus& corpus) {
  if (corpus.tallies.empty()) throw MetricError("bootstrap needs at least one scene");
}

}  // namespace

std::string_view metric_name(Metric m) { return kMetricNames[static_cast<std::size_t>(m)]; }

std::optional<Metric> parse_metric(std::string_view name) {
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    if (kMetricNames[i] == name) return static_cast<Metric>(i);
  }
  return std::nullopt;
}

MetricValues metric_values(const OutcomeTally& t) {
  ConsistencyScores c = consistency_from(t);
  ClassificationScores k = classification_from(t);
  FailureProfile f = failure_from(t);
  SensitivityScores s = sensitivity_from(t);

  MetricValues v;
  auto set = [&](Metric m, std::optional<double> x) { v[static_cast<std::size_t>(m)] = x; };
  set(Metric::quad_acc, c.quad_acc.to_double());
  set(Metric::contr_q_pos, c.contr_q_pos.to_double());
  set(Metric::reject_q_neg, c.reject_q_neg.to_double());
  set(Metric::contr_v_pos, c.contr_v_pos.to_double());
  set(Metric::reject_v_neg, c.reject_v_neg.to_double());
  set(Metric::video_consistency, c.video_consistency.to_double());
  set(Metric::question_consistency, c.question_consistency.to_double());
  set(Metric::balanced_accuracy, value_of(k.balanced_accuracy));
  set(Metric::mcc, k.mcc);
  set(Metric::mcc_score, k.mcc_score);
  set(Metric::pos_omiss, value_of(f.pos_omiss));
  set(Metric::pos_swap, value_of(f.pos_swap));
  set(Metric::neg_hall, value_of(f.neg_hall));
  set(Metric::me_viol, value_of(f.me_viol));
  set(Metric::vs, s.vs.to_double());
  set(Metric::qs, s.qs.to_double());
  set(Metric::vri, value_of(s.vri));
  set(Metric::gvrs, s.gvrs.to_double());
  set(Metric::sve, s.sve.to_double());
  return v;
}

OutcomeTally SceneCorpus::total() const {
  OutcomeTally t;
  for (const auto& s : tallies) t += s;
  return t;
}

SceneCorpus group_by_scene(std::span<const QuadOutcome> outcomes,
                           std::span<const Quadruple> manifest) {
  std::set<QuadrupleId> expected;
  for (const auto& q : manifest) expected.insert(q.id);

  std::map<std::string, OutcomeTally> by_scene;
  std::set<QuadrupleId> seen;
  for (const auto& o : outcomes) {
    if (!expected.contains(o.id)) throw MetricError("outcome for unknown quadruple " + to_string(o.id));
    seen.insert(o.id);
    by_scene[o.id.scene_id] += tally(o);
  }
  if (seen.size() != expected.size()) {
    throw MetricError("outcomes do not cover every manifest quadruple");
  }

  SceneCorpus corpus;
  for (auto& [scene, t] : by_scene) {
    corpus.scene_ids.push_back(scene);
    corpus.tallies.push_back(t);
  }
  return corpus;
}

void resample_scenes(std::uint64_t seed, std::uint64_t replicate, std::size_t scene_count,
                     std::span<std::uint32_t> out) {
  ReplicateStream stream(seed, replicate);
  auto bound = static_cast<std::uint32_t>(scene_count);
  for (auto& idx : out) idx = stream.below(bound);
}

ReplicateMatrix bootstrap_replicates(const SceneCorpus& corpus, const BootstrapConfig& config) {
  config.validate();
  require_scenes(corpus);
  ReplicateMatrix rows(config.replicates);
  const auto n = static_cast<std::int64_t>(config.replicates);

#pragma omp parallel
  {
    std::vector<std::uint32_t> scratch(corpus.tallies.size());
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) {
      compute_row(corpus, config, static_cast<std::size_t>(r), scratch,
                  rows[static_cast<std::size_t>(r)]);
    }
  }
  return rows;
}

ReplicateMatrix bootstrap_replicates_serial(const SceneCorpus& corpus,
                                            const BootstrapConfig& config) {
  config.validate();
  require_scenes(corpus);
  ReplicateMatrix rows(config.replicates);
  std::vector<std::uint32_t> scratch(corpus.tallies.size());
  for (std::size_t r = 0; r < rows.size(); ++r) compute_row(corpus, config, r, scratch, rows[r]);
  return rows;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::map<std::string, IntervalEstimate> summarize_intervals(const MetricValues& point,
                                                            const ReplicateMatrix& replicates,
                                                            double confidence) {
  const double tail = (1.0 - confidence) / 2.0;
  std::map<std::string, IntervalEstimate> out;
  for (std::size_t m = 0; m < kMetricCount; ++m) {
    std::vector<double> sample;
    sample.reserve(replicates.size());
    for (const auto& row : replicates) {
      if (row[m]) sample.push_back(*row[m]);
    }
    IntervalEstimate est;
    est.point = point[m];
    est.effective_replicates = sample.size();
    if (!sample.empty()) {
      est.lower = percentile(sample, tail);
      est.upper = percentile(std::move(sample), 1.0 - tail);
    }
    out.emplace(std::string(metric_name(static_cast<Metric>(m))), est);
  }
  return out;
}

std::map<std::string, IntervalEstimate> bootstrap_metrics(std::span<const QuadOutcome> outcomes,
                                                          std::span<const Quadruple> manifest,
                                                          const BootstrapConfig& config) {
  config.validate();
  SceneCorpus corpus = group_by_scene(outcomes, manifest);
  require_scenes(corpus);
  ReplicateMatrix rows = bootstrap_replicates(corpus, config);
  return summarize_intervals(metric_values(corpus.total()), rows, config.confidence);
}

RankingMatrix ranking_stability(std::span<const PredictionTable> tables,
                                std::span<const Quadruple> manifest,
                                const BootstrapConfig& config, Metric metric,
                                const ResampleObserver& observer) {
  config.validate();
  if (tables.size() < 2) throw std::invalid_argument("ranking stability needs at least two models");
  std::set<std::string> ids;
  for (const auto& t : tables) {
    if (!ids.insert(t.model_id).second) {
      throw std::invalid_argument("duplicate model_id '" + t.model_id + "'");
    }
  }

  std::vector<SceneCorpus> corpora;
  corpora.reserve(tables.size());
  for (const auto& t : tables) corpora.push_back(group_by_scene(build_outcomes(manifest, t), manifest));
  require_scenes(corpora.front());

  const std::size_t models = tables.size();
  const std::size_t scenes = corpora.front().tallies.size();
  const auto m = static_cast<std::size_t>(metric);

  // wins[r][a*models+b]: score of a against b in replicate r (1, 0.5, 0, or -1 if undefined).
  std::vector<std::vector<double>> wins(config.replicates, std::vector<double>(models * models, -1.0));
  const auto n = static_cast<std::int64_t>(config.replicates);

#pragma omp parallel
  {
    std::vector<std::uint32_t> indices(scenes);
    std::vector<std::optional<double>> values(models);
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) {
      const auto rep = static_cast<std::size_t>(r);
      resample_scenes(config.seed, rep, scenes, indices);
      for (std::size_t k = 0; k < models; ++k) {
        if (observer) {
#pragma omp critical(quadeval_resample_observer)
          observer(rep, k, indices);
        }
        values[k] = metric_values(resampled_tally(corpora[k], indices))[m];
      }
      for (std::size_t a = 0; a < models; ++a) {
        for (std::size_t b = 0; b < models; ++b) {
          if (a == b || !values[a] || !values[b]) continue;
          double w = *values[a] > *values[b] ? 1.0 : (*values[a] == *values[b] ? 0.5 : 0.0);
          wins[rep][a * models + b] = w;
        }
      }
    }
  }

  RankingMatrix result;
  for (std::size_t a = 0; a < models; ++a) {
    for (std::size_t b = 0; b < models; ++b) {
      if (a == b) continue;
      double sum = 0.0;
      std::size_t defined = 0;
      for (const auto& row : wins) {
        if (row[a * models + b] < 0.0) continue;
        sum += row[a * models + b];
        ++defined;
      }
      if (defined > 0) {
        result[{tables[a].model_id, tables[b].model_id}] = sum / static_cast<double>(defined);
      }
    }
  }
  return result;
}

}  // namespace quadeval
