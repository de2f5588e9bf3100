#include "quadeval/bench_model.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace quadeval {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::event: return "event";
    case Category::key_entity: return "key_entity";
    case Category::spatial: return "spatial";
    case Category::spatial_temporal: return "spatial_temporal";
    case Category::causal: return "causal";
    case Category::counterfactual: return "counterfactual";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string to_string(const QuadrupleId& id) {
  return id.scene_id + "#" + std::to_string(id.pair_index);
}

std::string_view to_string(Variant v) { return v == Variant::pos ? "pos" : "neg"; }

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "pos") return Variant::pos;
  if (name == "neg") return Variant::neg;
  return std::nullopt;
}

std::string to_string(const Cell& c) {
  return "(v" + std::string(c.video == Variant::pos ? "+" : "-") + ",q" +
         std::string(c.question == Variant::pos ? "+" : "-") + ")";
}

std::string_view to_string(AnswerLabel a) {
  switch (a) {
    case AnswerLabel::yes: return "yes";
    case AnswerLabel::no: return "no";
    case AnswerLabel::invalid: return "invalid";
  }
  return "?";
}

std::string_view to_string(FindingKind k) {
  switch (k) {
    case FindingKind::duplicate_id: return "duplicate_id";
    case FindingKind::missing_field: return "missing_field";
    case FindingKind::bad_category: return "bad_category";
    case FindingKind::identical_questions: return "identical_questions";
    case FindingKind::identical_videos: return "identical_videos";
    case FindingKind::missing_cell: return "missing_cell";
    case FindingKind::unknown_quadruple: return "unknown_quadruple";
  }
  return "?";
}

std::string describe(const Finding& f) {
  std::string out(to_string(f.kind));
  if (f.id) out += " " + to_string(*f.id);
  if (f.cell) out += " " + to_string(*f.cell);
  if (!f.detail.empty()) out += ": " + f.detail;
  return out;
}

namespace {

void sort_findings(std::vector<Finding>& findings) {
  auto key = [](const Finding& f) {
    return std::make_tuple(f.id, f.kind, f.cell, f.detail);
  };
  std::sort(findings.begin(), findings.end(),
            [&](const Finding& a, const Finding& b) { return key(a) < key(b); });
}

void count_structure(std::span<const Quadruple> manifest, ValidationReport& report) {
  std::set<std::string_view> scenes;
  for (const auto& q : manifest) scenes.insert(q.id.scene_id);
  report.scene_count = scenes.size();
  report.quadruple_count = manifest.size();
  report.instance_count = 4 * manifest.size();
}

}  // namespace

ValidationReport validate_manifest(std::span<const Quadruple> manifest) {
  ValidationReport report;
  count_structure(manifest, report);

  std::map<QuadrupleId, std::size_t> seen;
  for (const auto& q : manifest) ++seen[q.id];
  for (const auto& [id, n] : seen) {
    if (n > 1) {
      report.findings.push_back(
          {FindingKind::duplicate_id, id, std::nullopt, std::to_string(n) + " records"});
    }
  }

  for (const auto& q : manifest) {
    auto missing = [&](std::string_view field) {
      report.findings.push_back(
          {FindingKind::missing_field, q.id, std::nullopt, std::string(field)});
    };
    if (q.id.scene_id.empty()) missing("scene_id");
    if (q.q_pos_text.empty()) missing("q_pos_text");
    if (q.q_neg_text.empty()) missing("q_neg_text");
    if (q.v_pos_ref.empty()) missing("v_pos_ref");
    if (q.v_neg_ref.empty()) missing("v_neg_ref");
    if (!q.category) {
      if (q.category_label.empty()) {
        missing("category");
      } else {
        report.findings.push_back(
            {FindingKind::bad_category, q.id, std::nullopt, q.category_label});
      }
    }
    if (!q.q_pos_text.empty() && q.q_pos_text == q.q_neg_text) {
      report.findings.push_back({FindingKind::identical_questions, q.id, std::nullopt, {}});
    }
    if (!q.v_pos_ref.empty() && q.v_pos_ref == q.v_neg_ref) {
      report.findings.push_back({FindingKind::identical_videos, q.id, std::nullopt, {}});
    }
  }

  sort_findings(report.findings);
  return report;
}

ValidationReport validate_predictions(std::span<const Quadruple> manifest,
                                      const PredictionTable& table) {
  ValidationReport report;
  count_structure(manifest, report);

  std::set<QuadrupleId> known;
  for (const auto& q : manifest) known.insert(q.id);

  for (const auto& id : known) {
    for (const Cell& cell : kAllCells) {
      if (!table.entries.contains(CellKey{id, cell})) {
        report.findings.push_back({FindingKind::missing_cell, id, cell, {}});
      }
    }
  }

  std::set<QuadrupleId> reported_unknown;
  for (const auto& [key, label] : table.entries) {
    if (label == AnswerLabel::invalid) ++report.invalid_count;
    if (!known.contains(key.id) && reported_unknown.insert(key.id).second) {
      report.findings.push_back({FindingKind::unknown_quadruple, key.id, std::nullopt, {}});
    }
  }

  sort_findings(report.findings);
  return report;
}

}  // namespace quadeval
