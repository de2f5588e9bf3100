#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "naive_oracle.hpp"
#include "quadeval/diagnostics.hpp"
#include "quadeval/metrics.hpp"
#include "test_support.hpp"

namespace quadeval {
namespace {

using namespace quadeval::testing;

TEST(QuadCorrectTest, Examples) {
  EXPECT_TRUE(quad_correct(outcome_of({Y, N, N, N})));
  EXPECT_FALSE(quad_correct(outcome_of({N, N, N, N})));
  QuadOutcome with_invalid = outcome_of({Y, N, I, N});
  EXPECT_FALSE(quad_correct(with_invalid));
  EXPECT_EQ(oracle::evaluate({with_invalid}).quad_acc.num, 0);
}

TEST(ConsistencyTest, PerfectOracle) {
  ConsistencyScores c = consistency_scores(uniform_outcomes(5, kPerfect));
  for (const Fraction& f : {c.quad_acc, c.contr_q_pos, c.reject_q_neg, c.contr_v_pos,
                            c.reject_v_neg, c.video_consistency, c.question_consistency}) {
    EXPECT_EQ(f, Fraction(1));
  }
}

TEST(ConsistencyTest, AlwaysNo) {
  auto outcomes = uniform_outcomes(7, kAlwaysNo);
  ConsistencyScores c = consistency_scores(outcomes);
  EXPECT_EQ(c.contr_q_pos, Fraction(0));
  EXPECT_EQ(c.reject_q_neg, Fraction(1));
  EXPECT_EQ(c.contr_v_pos, Fraction(0));
  EXPECT_EQ(c.reject_v_neg, Fraction(1));
  EXPECT_EQ(c.video_consistency, Fraction(1, 2));
  EXPECT_EQ(c.question_consistency, Fraction(1, 2));
  EXPECT_EQ(c.quad_acc, Fraction(0));

  auto o = oracle::evaluate(outcomes);
  EXPECT_TRUE(oracle::same(o.video_consistency, c.video_consistency));
  EXPECT_TRUE(oracle::same(o.reject_q_neg, c.reject_q_neg));
}

TEST(ConsistencyTest, AlwaysYes) {
  auto outcomes = uniform_outcomes(4, kAlwaysYes);
  ConsistencyScores c = consistency_scores(outcomes);
  for (const Fraction& f : {c.quad_acc, c.contr_q_pos, c.reject_q_neg, c.contr_v_pos,
                            c.reject_v_neg, c.video_consistency, c.question_consistency}) {
    EXPECT_EQ(f, Fraction(0));
  }
  EXPECT_TRUE(oracle::same(oracle::evaluate(outcomes).question_consistency, c.question_consistency));
}

TEST(ConsistencyTest, EmptyInputIsError) {
  EXPECT_THROW(consistency_scores({}), MetricError);
  EXPECT_THROW(classification_scores({}), MetricError);
}

TEST(ClassificationTest, PerfectOracle) {
  ClassificationScores k = classification_scores(uniform_outcomes(3, kPerfect));
  EXPECT_EQ(k.balanced_accuracy, Fraction(1));
  EXPECT_EQ(k.mcc, 1.0);
  EXPECT_EQ(k.mcc_score, 1.0);
}

TEST(ClassificationTest, AlwaysNo) {
  const std::int64_t n = 6;
  auto outcomes = uniform_outcomes(n, kAlwaysNo);
  ClassificationScores k = classification_scores(outcomes);
  EXPECT_EQ(k.tp, 0);
  EXPECT_EQ(k.fn, n);
  EXPECT_EQ(k.tn, 3 * n);
  EXPECT_EQ(k.fp, 0);
  EXPECT_EQ(k.balanced_accuracy, Fraction(1, 2));
  EXPECT_EQ(k.mcc, 0.0);
  EXPECT_EQ(k.mcc_score, 0.25);
  auto o = oracle::evaluate(outcomes);
  EXPECT_TRUE(oracle::same(o.balanced_accuracy, k.balanced_accuracy));
  EXPECT_EQ(o.mcc_sign, 0);
}

TEST(ClassificationTest, AlwaysYes) {
  ClassificationScores k = classification_scores(uniform_outcomes(6, kAlwaysYes));
  EXPECT_EQ(k.balanced_accuracy, Fraction(1, 2));
  EXPECT_EQ(k.mcc, 0.0);
  EXPECT_EQ(k.mcc_score, 0.25);
}

TEST(ClassificationTest, InvalidCellsExcludedAndCounted) {
  std::vector<QuadOutcome> outcomes = {outcome_of({I, N, Y, I}), outcome_of({Y, I, N, N})};
  ClassificationScores k = classification_scores(outcomes);
  EXPECT_EQ(k.invalid, 3);
  EXPECT_EQ(k.tp + k.fp + k.tn + k.fn + k.invalid, 8);
  EXPECT_EQ(k.tp, 1);
  EXPECT_EQ(k.fp, 1);
  EXPECT_EQ(k.tn, 3);
}

TEST(ClassificationTest, UndefinedBalancedAccuracyWhenPositivesAllInvalid) {
  ClassificationScores k = classification_scores(uniform_outcomes(2, {I, N, N, N}));
  EXPECT_FALSE(k.balanced_accuracy.has_value());
  EXPECT_EQ(k.mcc, 0.0);
}

TEST(ClassificationTest, KnownMcc) {
  // tp=2 fn=1 fp=1 tn=8: cov = 16 - 1 = 15, marginals 3*3*9*9 = 729, mcc = 15/27.
  std::vector<QuadOutcome> outcomes = {outcome_of({Y, N, N, N}), outcome_of({Y, Y, N, N}),
                                       outcome_of({N, N, N, N})};
  ClassificationScores k = classification_scores(outcomes);
  EXPECT_DOUBLE_EQ(k.mcc, 15.0 / 27.0);
  EXPECT_DOUBLE_EQ(k.mcc_score, ((15.0 / 27.0 + 1.0) / 2.0) * ((15.0 / 27.0 + 1.0) / 2.0));
  EXPECT_EQ(k.balanced_accuracy, (Fraction(2, 3) + Fraction(8, 9)) / Fraction(2));
}

TEST(MetricsPropertyTest, BruteForceEquivalence) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    auto outcomes = random_outcomes(rng, 1 + rng() % 64, trial % 3 == 0 ? 0.0 : 0.15);
    auto o = oracle::evaluate(outcomes);
    ConsistencyScores c = consistency_scores(outcomes);
    ClassificationScores k = classification_scores(outcomes);
    ASSERT_TRUE(oracle::same(o.quad_acc, c.quad_acc));
    ASSERT_TRUE(oracle::same(o.contr_q_pos, c.contr_q_pos));
    ASSERT_TRUE(oracle::same(o.reject_q_neg, c.reject_q_neg));
    ASSERT_TRUE(oracle::same(o.contr_v_pos, c.contr_v_pos));
    ASSERT_TRUE(oracle::same(o.reject_v_neg, c.reject_v_neg));
    ASSERT_TRUE(oracle::same(o.video_consistency, c.video_consistency));
    ASSERT_TRUE(oracle::same(o.question_consistency, c.question_consistency));
    ASSERT_EQ(o.tp, k.tp);
    ASSERT_EQ(o.fp, k.fp);
    ASSERT_EQ(o.tn, k.tn);
    ASSERT_EQ(o.fn, k.fn);
    ASSERT_TRUE(oracle::same(o.balanced_accuracy, k.balanced_accuracy));
  }
}

TEST(MetricsPropertyTest, InvariantsHold) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    auto outcomes = random_outcomes(rng, 1 + rng() % 40);
    ConsistencyScores c = consistency_scores(outcomes);
    ClassificationScores k = classification_scores(outcomes);

    EXPECT_EQ(c.video_consistency, (c.contr_q_pos + c.reject_q_neg) / Fraction(2));
    EXPECT_EQ(c.question_consistency, (c.contr_v_pos + c.reject_v_neg) / Fraction(2));
    EXPECT_LE(c.quad_acc, std::min({c.contr_q_pos, c.reject_q_neg, c.contr_v_pos, c.reject_v_neg}));
    EXPECT_EQ(k.tp + k.fp + k.tn + k.fn + k.invalid, 4 * static_cast<std::int64_t>(outcomes.size()));
    EXPECT_GE(k.mcc, -1.0);
    EXPECT_LE(k.mcc, 1.0);
    EXPECT_GE(k.mcc_score, 0.0);
    EXPECT_LE(k.mcc_score, 1.0);

    // quad_correct is exactly the conjunction of the four per-cell indicators.
    std::int64_t correct = 0;
    for (const auto& o : outcomes) {
      OutcomeTally t = tally(o);
      bool all = t.contr_q_pos && t.reject_q_neg && t.contr_v_pos && t.reject_v_neg;
      EXPECT_EQ(quad_correct(o), all);
      correct += quad_correct(o);
    }
    EXPECT_EQ(c.quad_acc, Fraction(correct, static_cast<std::int64_t>(outcomes.size())));

    auto shuffled = outcomes;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(consistency_scores(shuffled), c);
    EXPECT_EQ(classification_scores(shuffled), k);
  }
}

TEST(MetricsPropertyTest, MccScoreMonotone) {
  std::mt19937_64 rng(5);
  std::vector<ClassificationScores> all;
  for (int trial = 0; trial < 200; ++trial) all.push_back(classification_scores(random_outcomes(rng, 1 + rng() % 30)));
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.mcc < b.mcc; });
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LE(all[i - 1].mcc_score, all[i].mcc_score);
}

TEST(MetricsPropertyTest, VideoConsistencyMixesBySize) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_outcomes(rng, 1 + rng() % 20);
    auto b = random_outcomes(rng, 1 + rng() % 20);
    auto both = a;
    both.insert(both.end(), b.begin(), b.end());
    Fraction na(static_cast<std::int64_t>(a.size()));
    Fraction nb(static_cast<std::int64_t>(b.size()));
    Fraction mixed = (consistency_scores(a).video_consistency * na +
                      consistency_scores(b).video_consistency * nb) /
                     (na + nb);
    EXPECT_EQ(consistency_scores(both).video_consistency, mixed);
  }
}

TEST(BuildOutcomesTest, IncompleteTableRejected) {
  Manifest m = make_manifest(2, 1);
  PredictionTable t = uniform_table(m, kPerfect);
  EXPECT_EQ(build_outcomes(m, t).size(), 2u);
  t.entries.erase(t.entries.begin());
  EXPECT_THROW(build_outcomes(m, t), MetricError);
}

TEST(PerCategoryTest, SingleCategory) {
  Manifest m = {make_quadruple("a", 0, Category::event), make_quadruple("b", 0, Category::event)};
  auto result = per_category(build_outcomes(m, uniform_table(m, kPerfect)), m);
  ASSERT_EQ(result.size(), 1u);
  EXPECT_TRUE(result.contains(Category::event));
}

TEST(PerCategoryTest, IdenticalPatternsGiveIdenticalScores) {
  Manifest m = {make_quadruple("a", 0, Category::spatial), make_quadruple("b", 0, Category::causal)};
  auto result = per_category(build_outcomes(m, uniform_table(m, {Y, Y, N, Y})), m);
  ASSERT_EQ(result.size(), 2u);
  EXPECT_EQ(result.at(Category::spatial), result.at(Category::causal));
}

TEST(PerCategoryTest, MixedFixture) {
  Manifest m = {make_quadruple("a", 0, Category::event), make_quadruple("a", 1, Category::event),
                make_quadruple("b", 0, Category::event), make_quadruple("c", 0, Category::causal)};
  PredictionTable t = uniform_table(m, kPerfect);
  set_pattern(t, m[3].id, kAlwaysYes);
  auto outcomes = build_outcomes(m, t);
  auto result = per_category(outcomes, m);
  EXPECT_EQ(result.at(Category::event).consistency.quad_acc, Fraction(1));
  EXPECT_EQ(result.at(Category::causal).consistency.quad_acc, Fraction(0));
  EXPECT_EQ(result.at(Category::event).quadruples, 3);

  std::vector<QuadOutcome> event_slice(outcomes.begin(), outcomes.begin() + 3);
  EXPECT_TRUE(oracle::same(oracle::evaluate(event_slice).quad_acc,
                           result.at(Category::event).consistency.quad_acc));
}

TEST(PerCategoryTest, UnknownIdIsError) {
  Manifest m = {make_quadruple("a", 0)};
  std::vector<QuadOutcome> outcomes = {outcome_of(kPerfect, {"zzz", 3})};
  EXPECT_THROW(per_category(outcomes, m), MetricError);
}

}  // namespace
}  // namespace quadeval
