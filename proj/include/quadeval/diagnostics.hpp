#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "quadeval/fraction.hpp"
#include "quadeval/metrics.hpp"

namespace quadeval {

/// Failure modes a single quadruple exhibits. Invalid cells never count as
/// Yes; PosOmiss fires whenever (v+,q+) is not a concrete Yes.
struct FailureFlags {
  bool pos_omiss = false;
  bool pos_swap = false;
  bool neg_hall = false;
  bool me_viol = false;

  friend bool operator==(const FailureFlags&, const FailureFlags&) = default;
};

FailureFlags failure_flags(const QuadOutcome& o);

/// Per-outcome terms of the sensitivity indices. A difference involving an
/// invalid cell is 0; invalid equals invalid in the q- equality test.
struct SensitivityTerms {
  bool video_flip = false;
  bool question_flip = false;
  bool selective_video = false;
};

SensitivityTerms sensitivity_terms(const QuadOutcome& o);

struct FailureProfile {
  std::int64_t failed_count = 0;
  // All four are null when no quadruple failed.
  std::optional<Fraction> pos_omiss;
  std::optional<Fraction> pos_swap;
  std::optional<Fraction> neg_hall;
  std::optional<Fraction> me_viol;

  friend bool operator==(const FailureProfile&, const FailureProfile&) = default;
};

struct SensitivityScores {
  Fraction vs;
  Fraction qs;
  std::optional<Fraction> vri;
  Fraction gvrs;
  Fraction sve;

  friend bool operator==(const SensitivityScores&, const SensitivityScores&) = default;
};

FailureProfile failure_from(const OutcomeTally& t);
SensitivityScores sensitivity_from(const OutcomeTally& t);

FailureProfile failure_profile(std::span<const QuadOutcome> outcomes);
SensitivityScores sensitivity_scores(std::span<const QuadOutcome> outcomes);

}  // namespace quadeval
