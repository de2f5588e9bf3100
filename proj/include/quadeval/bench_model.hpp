#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace quadeval {

enum class Category { event, key_entity, spatial, spatial_temporal, causal, counterfactual };

inline constexpr std::array<Category, 6> kAllCategories = {
    Category::event,  Category::key_entity, Category::spatial,
    Category::spatial_temporal, Category::causal, Category::counterfactual};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);

struct QuadrupleId {
  std::string scene_id;
  std::uint32_t pair_index = 0;

  friend auto operator<=>(const QuadrupleId&, const QuadrupleId&) = default;
};

std::string to_string(const QuadrupleId& id);

enum class Variant { pos, neg };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

/// One of the four video/question combinations of a quadruple.
struct Cell {
  Variant video = Variant::pos;
  Variant question = Variant::pos;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// (v+,q+), (v+,q-), (v-,q+), (v-,q-) in that order.
inline constexpr std::array<Cell, 4> kAllCells = {
    Cell{Variant::pos, Variant::pos}, Cell{Variant::pos, Variant::neg},
    Cell{Variant::neg, Variant::pos}, Cell{Variant::neg, Variant::neg}};

std::string to_string(const Cell& c);

enum class AnswerLabel { yes, no, invalid };

std::string_view to_string(AnswerLabel a);

/// The gold answer is Yes only on (v+, q+).
constexpr AnswerLabel gold_label(const Cell& c) {
  return (c.video == Variant::pos && c.question == Variant::pos) ? AnswerLabel::yes
                                                                 : AnswerLabel::no;
}

struct Quadruple {
  QuadrupleId id;
  // Empty when the manifest named a category outside the six known ones.
  std::optional<Category> category;
  std::string category_label;
  std::string q_pos_text;
  std::string q_neg_text;
  std::string v_pos_ref;
  std::string v_neg_ref;
};

using Manifest = std::vector<Quadruple>;

struct CellKey {
  QuadrupleId id;
  Cell cell;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct PredictionTable {
  std::string model_id;
  std::map<CellKey, AnswerLabel> entries;

  friend bool operator==(const PredictionTable&, const PredictionTable&) = default;
};

enum class FindingKind {
  duplicate_id,
  missing_field,
  bad_category,
  identical_questions,
  identical_videos,
  missing_cell,
  unknown_quadruple,
};

std::string_view to_string(FindingKind k);

struct Finding {
  FindingKind kind;
  std::optional<QuadrupleId> id;
  std::optional<Cell> cell;
  std::string detail;

  friend bool operator==(const Finding&, const Finding&) = default;
};

std::string describe(const Finding& f);

struct ValidationReport {
  std::vector<Finding> findings;
  std::size_t scene_count = 0;
  std::size_t quadruple_count = 0;
  std::size_t instance_count = 0;
  std::size_t invalid_count = 0;

  bool ok() const { return findings.empty(); }
};

ValidationReport validate_manifest(std::span<const Quadruple> manifest);

ValidationReport validate_predictions(std::span<const Quadruple> manifest,
                                      const PredictionTable& table);

}  // namespace quadeval
