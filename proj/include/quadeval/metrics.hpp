#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "quadeval/bench_model.hpp"
#include "quadeval/fraction.hpp"

namespace quadeval {

/// The four answers of one quadruple: (v+,q+), (v+,q-), (v-,q+), (v-,q-).
struct QuadOutcome {
  QuadrupleId id;
  AnswerLabel y_pp = AnswerLabel::invalid;
  AnswerLabel y_pm = AnswerLabel::invalid;
  AnswerLabel y_mp = AnswerLabel::invalid;
  AnswerLabel y_mm = AnswerLabel::invalid;
};

class MetricError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Pairs every manifest quadruple with its four table entries, in manifest
/// order. Throws MetricError when the table is incomplete.
std::vector<QuadOutcome> build_outcomes(std::span<const Quadruple> manifest,
                                        const PredictionTable& table);

/// Integer sufficient statistics of a set of outcomes. Every metric and
/// diagnostic is a function of these counts, so tallies of disjoint sets
/// (or of a scene resample) can simply be added.
struct OutcomeTally {
  std::int64_t quadruples = 0;
  std::int64_t quad_correct = 0;
  std::int64_t contr_q_pos = 0;
  std::int64_t reject_q_neg = 0;
  std::int64_t contr_v_pos = 0;
  std::int64_t reject_v_neg = 0;

  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  std::int64_t invalid = 0;

  std::int64_t pos_omiss = 0;
  std::int64_t pos_swap = 0;
  std::int64_t neg_hall = 0;
  std::int64_t me_viol = 0;

  std::int64_t video_flips = 0;
  std::int64_t question_flips = 0;
  std::int64_t selective_video = 0;

  void add(const OutcomeTally& other, std::int64_t multiplicity = 1);
  OutcomeTally& operator+=(const OutcomeTally& other) {
    add(other);
    return *this;
  }
  friend bool operator==(const OutcomeTally&, const OutcomeTally&) = default;
};

OutcomeTally tally(const QuadOutcome& outcome);
OutcomeTally tally(std::span<const QuadOutcome> outcomes);

bool quad_correct(const QuadOutcome& outcome);

struct ConsistencyScores {
  Fraction quad_acc;
  Fraction contr_q_pos;
  Fraction reject_q_neg;
  Fraction contr_v_pos;
  Fraction reject_v_neg;
  Fraction video_consistency;
  Fraction question_consistency;

  friend bool operator==(const ConsistencyScores&, const ConsistencyScores&) = default;
};

struct ClassificationScores {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  std::int64_t invalid = 0;
  // Null when one gold class has no valid (parseable) cell.
  std::optional<Fraction> balanced_accuracy;
  double mcc = 0.0;
  double mcc_score = 0.25;

  /// Numerator tp*tn - fp*fn and the product of the four marginals; mcc is
  /// their ratio over the square root of the product (0 when it is zero).
  std::int64_t mcc_covariance() const { return tp * tn - fp * fn; }
  __int128 mcc_marginal_product() const;

  friend bool operator==(const ClassificationScores&, const ClassificationScores&) = default;
};

ConsistencyScores consistency_from(const OutcomeTally& t);
ClassificationScores classification_from(const OutcomeTally& t);

ConsistencyScores consistency_scores(std::span<const QuadOutcome> outcomes);
ClassificationScores classification_scores(std::span<const QuadOutcome> outcomes);

struct CategoryScores {
  std::int64_t quadruples = 0;
  ConsistencyScores consistency;
  ClassificationScores classification;

  friend bool operator==(const CategoryScores&, const CategoryScores&) = default;
};

/// Categories without quadruples are absent from the result.
std::map<Category, CategoryScores> per_category(std::span<const QuadOutcome> outcomes,
                                                std::span<const Quadruple> manifest);

}  // namespace quadeval
