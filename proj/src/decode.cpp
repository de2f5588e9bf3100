#include "quadeval/decode.hpp"

#include <cmath>

namespace quadeval {

LogitVector::LogitVector(std::map<std::string, double> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw DecodeError("logit vector is empty");
  for (const auto& [token, value] : entries_) {
    if (!std::isfinite(value)) throw DecodeError("non-finite logit for token '" + token + "'");
  }
}

std::string_view to_string(FusionMode m) {
  switch (m) {
    case FusionMode::vcd: return "vcd";
    case FusionMode::tcd: return "tcd";
    case FusionMode::c_tcd: return "c-tcd";
  }
  return "?";
}

std::optional<FusionMode> parse_fusion_mode(std::string_view name) {
  if (name == "vcd") return FusionMode::vcd;
  if (name == "tcd") return FusionMode::tcd;
  if (name == "c-tcd") return FusionMode::c_tcd;
  return std::nullopt;
}

void FusionConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw DecodeError("alpha must be a finite non-negative number");
  }
}

LogitVector fuse(const LogitVector& original, const LogitVector& contrast, double alpha) {
  FusionConfig{alpha}.validate();

  std::string missing;
  for (const auto& [token, _] : original.entries()) {
    if (!contrast.entries().contains(token)) missing += " '" + token + "' (contrast)";
  }
  for (const auto& [token, _] : contrast.entries()) {
    if (!original.entries().contains(token)) missing += " '" + token + "' (original)";
  }
  if (!missing.empty()) throw DecodeError("logit key sets differ; missing:" + missing);

  std::map<std::string, double> fused;
  auto con = contrast.entries().begin();
  for (const auto& [token, ori] : original.entries()) {
    double z = ori + alpha * (ori - con->second);
    if (!std::isfinite(z)) throw DecodeError("fused logit for '" + token + "' is not finite");
    fused.emplace_hint(fused.end(), token, z);
    ++con;
  }
  return LogitVector(std::move(fused));
}

std::string select_token(const LogitVector& fused) {
  auto best = fused.entries().begin();
  for (auto it = std::next(best); it != fused.entries().end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

std::string_view degradation_tag(FusionMode m) {
  switch (m) {
    case FusionMode::vcd: return "vcd-noise";
    case FusionMode::tcd: return "tcd-downsample";
    case FusionMode::c_tcd: return "";
  }
  return "";
}

namespace {

const Quadruple& find_quadruple(const QuadrupleId& id, std::span<const Quadruple> manifest) {
  for (const auto& q : manifest) {
    if (q.id == id) return q;
  }
  throw DecodeError("unknown quadruple " + to_string(id));
}

}  // namespace

std::string original_video(const CellKey& instance, std::span<const Quadruple> manifest) {
  const Quadruple& q = find_quadruple(instance.id, manifest);
  return instance.cell.video == Variant::pos ? q.v_pos_ref : q.v_neg_ref;
}

ContrastInput contrast_selector(const CellKey& instance, std::span<const Quadruple> manifest,
                                FusionMode mode) {
  const Quadruple& q = find_quadruple(instance.id, manifest);
  const bool pos = instance.cell.video == Variant::pos;
  if (mode == FusionMode::c_tcd) return {pos ? q.v_neg_ref : q.v_pos_ref, ""};
  return {pos ? q.v_pos_ref : q.v_neg_ref, std::string(degradation_tag(mode))};
}

}  // namespace quadeval
