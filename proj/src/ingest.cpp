#include "quadeval/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace quadeval {

using nlohmann::json;

ParseError::ParseError(std::string source, std::size_t line, std::string field,
                       const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) +
                         (field.empty() ? "" : " [" + field + "]") + ": " + what),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_trailing_punct(char c) { return c == '.' || c == ',' || c == '!' || c == ';'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string normalize(std::string_view s) {
  s = trim(s);
  while (!s.empty() && (is_trailing_punct(s.back()) || is_space(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
  });
  return out;
}

AnswerLabel label_of(std::string_view normalized) {
  if (normalized == "yes") return AnswerLabel::yes;
  if (normalized == "no") return AnswerLabel::no;
  return AnswerLabel::invalid;
}

json parse_line(const std::string& line, const std::string& source, std::size_t lineno) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, lineno, "", std::string("malformed record: ") + e.what());
  }
  if (!record.is_object()) throw ParseError(source, lineno, "", "record is not an object");
  return record;
}

std::string require_string(const json& record, const char* field, const std::string& source,
                           std::size_t lineno) {
  auto it = record.find(field);
  if (it == record.end()) throw ParseError(source, lineno, field, "missing field");
  if (!it->is_string()) throw ParseError(source, lineno, field, "expected a string");
  return it->get<std::string>();
}

std::uint32_t require_index(const json& record, const std::string& source, std::size_t lineno) {
  auto it = record.find("pair_index");
  if (it == record.end()) throw ParseError(source, lineno, "pair_index", "missing field");
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0 ||
      it->get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
    throw ParseError(source, lineno, "pair_index", "expected a non-negative integer");
  }
  return static_cast<std::uint32_t>(it->get<std::int64_t>());
}

Variant require_variant(const json& record, const char* field, const std::string& source,
                        std::size_t lineno) {
  std::string value = require_string(record, field, source, lineno);
  auto v = parse_variant(value);
  if (!v) throw ParseError(source, lineno, field, "unknown cell value '" + value + "'");
  return *v;
}

bool blank(const std::string& line) { return trim(line).empty(); }

}  // namespace

AnswerLabel parse_answer(std::string_view text) {
  std::string whole = normalize(text);
  if (AnswerLabel a = label_of(whole); a != AnswerLabel::invalid) return a;

  std::string_view rest = trim(text);
  auto end = std::find_if(rest.begin(), rest.end(), is_space);
  std::string_view first = rest.substr(0, static_cast<std::size_t>(end - rest.begin()));
  return label_of(normalize(first));
}

std::string format_prompt(std::string_view question) {
  return "You are given a traffic video and a question. Answer based only on the video with "
         "exactly one word: Yes or No. Question: " +
         std::string(question) + ".";
}

Manifest read_manifest(std::istream& in, const std::string& source) {
  Manifest manifest;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    json record = parse_line(line, source, lineno);

    Quadruple q;
    q.id.scene_id = require_string(record, "scene_id", source, lineno);
    q.id.pair_index = require_index(record, source, lineno);
    q.category_label = require_string(record, "category", source, lineno);
    q.category = parse_category(q.category_label);
    q.q_pos_text = require_string(record, "q_pos_text", source, lineno);
    q.q_neg_text = require_string(record, "q_neg_text", source, lineno);
    q.v_pos_ref = require_string(record, "v_pos_ref", source, lineno);
    q.v_neg_ref = require_string(record, "v_neg_ref", source, lineno);
    manifest.push_back(std::move(q));
  }
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  return read_manifest(in, path.string());
}

std::string manifest_record_json(const Quadruple& q) {
  json record = {
      {"scene_id", q.id.scene_id},     {"pair_index", q.id.pair_index},
      {"category", q.category_label},  {"q_pos_text", q.q_pos_text},
      {"q_neg_text", q.q_neg_text},    {"v_pos_ref", q.v_pos_ref},
      {"v_neg_ref", q.v_neg_ref},
  };
  return record.dump();
}

PredictionLoad read_predictions(std::istream& in, std::span<const Quadruple> manifest,
                                const std::string& fallback_model_id, const std::string& source) {
  PredictionLoad load;
  std::optional<std::string> model_id;
  std::string line;
  std::size_t lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    json record = parse_line(line, source, lineno);

    CellKey key;
    key.id.scene_id = require_string(record, "scene_id", source, lineno);
    key.id.pair_index = require_index(record, source, lineno);
    key.cell.video = require_variant(record, "video_variant", source, lineno);
    key.cell.question = require_variant(record, "question_variant", source, lineno);

    if (record.contains("model_id")) {
      std::string id = require_string(record, "model_id", source, lineno);
      if (model_id && *model_id != id) {
        throw ParseError(source, lineno, "model_id",
                         "model_id '" + id + "' disagrees with '" + *model_id + "'");
      }
      model_id = id;
    }

    bool has_label = record.contains("label");
    bool has_text = record.contains("raw_text");
    if (has_label == has_text) {
      throw ParseError(source, lineno, "label",
                       "exactly one of label or raw_text is required");
    }

    AnswerLabel label;
    if (has_label) {
      std::string value = require_string(record, "label", source, lineno);
      if (value == "yes") {
        label = AnswerLabel::yes;
      } else if (value == "no") {
        label = AnswerLabel::no;
      } else {
        throw ParseError(source, lineno, "label", "expected \"yes\" or \"no\"");
      }
    } else {
      std::string text = require_string(record, "raw_text", source, lineno);
      label = parse_answer(text);
      load.raw_responses.push_back({key.id, key.cell, text, {}});
    }

    auto [it, inserted] = load.table.entries.emplace(key, label);
    if (!inserted && it->second != label) {
      throw ParseError(source, lineno, "", "conflicting labels for " + to_string(key.id) + " " +
                                               to_string(key.cell));
    }
  }

  load.table.model_id = model_id.value_or(fallback_model_id);
  for (auto& r : load.raw_responses) r.model_id = load.table.model_id;
  load.report = validate_predictions(manifest, load.table);
  return load;
}

PredictionLoad load_predictions(const std::filesystem::path& path,
                                std::span<const Quadruple> manifest) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  std::string stem = path.stem().string();
  return read_predictions(in, manifest, stem, path.string());
}

void write_predictions(std::ostream& out, const PredictionTable& table) {
  for (const auto& [key, label] : table.entries) {
    json record = {
        {"scene_id", key.id.scene_id},
        {"pair_index", key.id.pair_index},
        {"video_variant", to_string(key.cell.video)},
        {"question_variant", to_string(key.cell.question)},
        {"model_id", table.model_id},
    };
    if (label == AnswerLabel::invalid) {
      record["raw_text"] = "";
    } else {
      record["label"] = to_string(label);
    }
    out << record.dump() << '\n';
  }
}

}  // namespace quadeval
