#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "quadeval/bench_model.hpp"

namespace quadeval {

class DecodeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Candidate-token logits for one decoding step. Never empty; every value finite.
class LogitVector {
public:
  explicit LogitVector(std::map<std::string, double> entries);

  const std::map<std::string, double>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double at(const std::string& token) const { return entries_.at(token); }

  friend bool operator==(const LogitVector&, const LogitVector&) = default;

private:
  std::map<std::string, double> entries_;
};

enum class FusionMode { vcd, tcd, c_tcd };

std::string_view to_string(FusionMode m);
std::optional<FusionMode> parse_fusion_mode(std::string_view name);

struct FusionConfig {
  double alpha = 0.0;
  FusionMode mode = FusionMode::c_tcd;

  void validate() const;
};

/// Tokenwise (1 + alpha) * original - alpha * contrast, evaluated as
/// original + alpha * (original - contrast) so that alpha = 0 and
/// original == contrast both return `original` bit for bit.
LogitVector fuse(const LogitVector& original, const LogitVector& contrast, double alpha);

/// Greedy choice: the largest logit, ties going to the lexicographically
/// smallest token.
std::string select_token(const LogitVector& fused);

/// What the runner should use as the contrast input for one instance.
/// For c-tcd this is the paired counterpart video; for vcd and tcd it is the
/// original video, degraded runner-side as named by `degradation`.
struct ContrastInput {
  std::string video_ref;
  std::string degradation;

  friend bool operator==(const ContrastInput&, const ContrastInput&) = default;
};

std::string_view degradation_tag(FusionMode m);

/// Throws DecodeError when the instance is not in the manifest.
ContrastInput contrast_selector(const CellKey& instance, std::span<const Quadruple> manifest,
                                FusionMode mode);

/// Video reference the instance itself is asked about.
std::string original_video(const CellKey& instance, std::span<const Quadruple> manifest);

}  // namespace quadeval
