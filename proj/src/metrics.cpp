#include "quadeval/metrics.hpp"

#include <cmath>

#include "quadeval/diagnostics.hpp"

namespace quadeval {

namespace {

constexpr bool is_yes(AnswerLabel a) { return a == AnswerLabel::yes; }
constexpr bool is_no(AnswerLabel a) { return a == AnswerLabel::no; }

void require_nonempty(const OutcomeTally& t) {
  if (t.quadruples == 0) throw MetricError("scores need at least one quadruple");
}

}  // namespace

std::vector<QuadOutcome> build_outcomes(std::span<const Quadruple> manifest,
                                        const PredictionTable& table) {
  std::vector<QuadOutcome> outcomes;
  outcomes.reserve(manifest.size());
  for (const auto& q : manifest) {
    auto lookup = [&](Variant video, Variant question) {
      auto it = table.entries.find(CellKey{q.id, Cell{video, question}});
      if (it == table.entries.end()) {
        throw MetricError("model '" + table.model_id + "' has no answer for " + to_string(q.id) +
                          " " + to_string(Cell{video, question}));
      }
      return it->second;
    };
    outcomes.push_back({q.id, lookup(Variant::pos, Variant::pos),
                        lookup(Variant::pos, Variant::neg), lookup(Variant::neg, Variant::pos),
                        lookup(Variant::neg, Variant::neg)});
  }
  return outcomes;
}

void OutcomeTally::add(const OutcomeTally& o, std::int64_t m) {
  quadruples += m * o.quadruples;
  quad_correct += m * o.quad_correct;
  contr_q_pos += m * o.contr_q_pos;
  reject_q_neg += m * o.reject_q_neg;
  contr_v_pos += m * o.contr_v_pos;
  reject_v_neg += m * o.reject_v_neg;
  tp += m * o.tp;
  fp += m * o.fp;
  tn += m * o.tn;
  fn += m * o.fn;
  invalid += m * o.invalid;
  pos_omiss += m * o.pos_omiss;
  pos_swap += m * o.pos_swap;
  neg_hall += m * o.neg_hall;
  me_viol += m * o.me_viol;
  video_flips += m * o.video_flips;
  question_flips += m * o.question_flips;
  selective_video += m * o.selective_video;
}

bool quad_correct(const QuadOutcome& o) {
  return is_yes(o.y_pp) && is_no(o.y_pm) && is_no(o.y_mp) && is_no(o.y_mm);
}

OutcomeTally tally(const QuadOutcome& o) {
  OutcomeTally t;
  t.quadruples = 1;
  t.quad_correct = quad_correct(o);
  t.contr_q_pos = is_yes(o.y_pp) && is_no(o.y_mp);
  t.reject_q_neg = is_no(o.y_pm) && is_no(o.y_mm);
  t.contr_v_pos = is_yes(o.y_pp) && is_no(o.y_pm);
  t.reject_v_neg = is_no(o.y_mp) && is_no(o.y_mm);

  // Gold is Yes on (v+,q+) and No elsewhere; invalid cells stay out of the
  // confusion matrix.
  switch (o.y_pp) {
    case AnswerLabel::yes: ++t.tp; break;
    case AnswerLabel::no: ++t.fn; break;
    case AnswerLabel::invalid: ++t.invalid; break;
  }
  for (AnswerLabel a : {o.y_pm, o.y_mp, o.y_mm}) {
    switch (a) {
      case AnswerLabel::yes: ++t.fp; break;
      case AnswerLabel::no: ++t.tn; break;
      case AnswerLabel::invalid: ++t.invalid; break;
    }
  }

  if (!t.quad_correct) {
    FailureFlags f = failure_flags(o);
    t.pos_omiss = f.pos_omiss;
    t.pos_swap = f.pos_swap;
    t.neg_hall = f.neg_hall;
    t.me_viol = f.me_viol;
  }

  SensitivityTerms s = sensitivity_terms(o);
  t.video_flips = s.video_flip;
  t.question_flips = s.question_flip;
  t.selective_video = s.selective_video;
  return t;
}

OutcomeTally tally(std::span<const QuadOutcome> outcomes) {
  OutcomeTally total;
  for (const auto& o : outcomes) total += tally(o);
  return total;
}

ConsistencyScores consistency_from(const OutcomeTally& t) {
  require_nonempty(t);
  ConsistencyScores c;
  const std::int64_t n = t.quadruples;
  c.quad_acc = Fraction(t.quad_correct, n);
  c.contr_q_pos = Fraction(t.contr_q_pos, n);
  c.reject_q_neg = Fraction(t.reject_q_neg, n);
  c.contr_v_pos = Fraction(t.contr_v_pos, n);
  c.reject_v_neg = Fraction(t.reject_v_neg, n);
  c.video_consistency = Fraction(t.contr_q_pos + t.reject_q_neg, 2 * n);
  c.question_consistency = Fraction(t.contr_v_pos + t.reject_v_neg, 2 * n);
  return c;
}

__int128 ClassificationScores::mcc_marginal_product() const {
  return static_cast<__int128>(tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
}

ClassificationScores classification_from(const OutcomeTally& t) {
  require_nonempty(t);
  ClassificationScores c;
  c.tp = t.tp;
  c.fp = t.fp;
  c.tn = t.tn;
  c.fn = t.fn;
  c.invalid = t.invalid;

  if (t.tp + t.fn > 0 && t.tn + t.fp > 0) {
    c.balanced_accuracy =
        (Fraction(t.tp, t.tp + t.fn) + Fraction(t.tn, t.tn + t.fp)) * Fraction(1, 2);
  }

  // Any empty marginal makes MCC 0 by convention.
  __int128 product = c.mcc_marginal_product();
  if (product > 0) {
    long double denom = std::sqrt(static_cast<long double>(product));
    c.mcc = static_cast<double>(static_cast<long double>(c.mcc_covariance()) / denom);
  }
  double half = (c.mcc + 1.0) / 2.0;
  c.mcc_score = half * half;
  return c;
}

ConsistencyScores consistency_scores(std::span<const QuadOutcome> outcomes) {
  return consistency_from(tally(outcomes));
}

ClassificationScores classification_scores(std::span<const QuadOutcome> outcomes) {
  return classification_from(tally(outcomes));
}

std::map<Category, CategoryScores> per_category(std::span<const QuadOutcome> outcomes,
                                                std::span<const Quadruple> manifest) {
  std::map<QuadrupleId, Category> category_of;
  for (const auto& q : manifest) {
    if (!q.category) throw MetricError("quadruple " + to_string(q.id) + " has no valid category");
    category_of.emplace(q.id, *q.category);
  }

  std::map<Category, OutcomeTally> tallies;
  for (const auto& o : outcomes) {
    auto it = category_of.find(o.id);
    if (it == category_of.end()) throw MetricError("outcome for unknown quadruple " + to_string(o.id));
    tallies[it->second] += tally(o);
  }

  std::map<Category, CategoryScores> result;
  for (const auto& [category, t] : tallies) {
    result.emplace(category, CategoryScores{t.quadruples, consistency_from(t), classification_from(t)});
  }
  return result;
}

}  // namespace quadeval
