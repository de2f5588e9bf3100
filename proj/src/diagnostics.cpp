#include "quadeval/diagnostics.hpp"

namespace quadeval {

namespace {

constexpr bool is_yes(AnswerLabel a) { return a == AnswerLabel::yes; }
constexpr bool concrete(AnswerLabel a) { return a != AnswerLabel::invalid; }

}  // namespace

FailureFlags failure_flags(const QuadOutcome& o) {
  FailureFlags f;
  f.pos_omiss = !is_yes(o.y_pp);
  f.pos_swap = is_yes(o.y_pm);
  f.neg_hall = is_yes(o.y_mp) || is_yes(o.y_mm);
  f.me_viol = (is_yes(o.y_pp) && is_yes(o.y_pm)) || (is_yes(o.y_mp) && is_yes(o.y_mm));
  return f;
}

SensitivityTerms sensitivity_terms(const QuadOutcome& o) {
  SensitivityTerms t;
  t.video_flip = concrete(o.y_pp) && concrete(o.y_mp) && o.y_pp != o.y_mp;
  t.question_flip = concrete(o.y_pp) && concrete(o.y_pm) && o.y_pp != o.y_pm;
  t.selective_video = t.video_flip && o.y_pm == o.y_mm;
  return t;
}

FailureProfile failure_from(const OutcomeTally& t) {
  FailureProfile p;
  p.failed_count = t.quadruples - t.quad_correct;
  if (p.failed_count == 0) return p;
  p.pos_omiss = Fraction(t.pos_omiss, p.failed_count);
  p.pos_swap = Fraction(t.pos_swap, p.failed_count);
  p.neg_hall = Fraction(t.neg_hall, p.failed_count);
  p.me_viol = Fraction(t.me_viol, p.failed_count);
  return p;
}

SensitivityScores sensitivity_from(const OutcomeTally& t) {
  if (t.quadruples == 0) throw MetricError("sensitivity scores need at least one quadruple");
  SensitivityScores s;
  s.vs = Fraction(t.video_flips, t.quadruples);
  s.qs = Fraction(t.question_flips, t.quadruples);
  s.sve = Fraction(t.selective_video, t.quadruples);
  if (t.video_flips + t.question_flips > 0) {
    s.vri = Fraction(t.video_flips, t.video_flips + t.question_flips);
    s.gvrs = Fraction(2) * *s.vri * s.qs;
  }
  return s;
}

FailureProfile failure_profile(std::span<const QuadOutcome> outcomes) {
  return failure_from(tally(outcomes));
}

SensitivityScores sensitivity_scores(std::span<const QuadOutcome> outcomes) {
  return sensitivity_from(tally(outcomes));
}

}  // namespace quadeval
