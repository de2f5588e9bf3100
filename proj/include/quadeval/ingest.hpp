#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quadeval/bench_model.hpp"

namespace quadeval {

/// Raised by the loaders for anything that prevents building a record.
/// `line()` is 1-based; `field()` is empty when the whole line is bad.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string source, std::size_t line, std::string field, const std::string& what);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

private:
  std::string source_;
  std::size_t line_;
  std::string field_;
};

struct RawResponse {
  QuadrupleId quadruple_id;
  Cell cell;
  std::string text;
  std::string model_id;
};

/// Maps a free-text model answer to a binary label. Trims whitespace, strips
/// trailing . , ! ; and case-folds; the whole text or, failing that, its first
/// whitespace-delimited token must then read "yes" or "no".
AnswerLabel parse_answer(std::string_view text);

/// Binary question prompt sent to the model for one (video, question) query.
std::string format_prompt(std::string_view question);

Manifest read_manifest(std::istream& in, const std::string& source = "<stream>");
Manifest load_manifest(const std::filesystem::path& path);

/// One manifest record as a canonical single-line JSON object (sorted keys).
std::string manifest_record_json(const Quadruple& q);

struct PredictionLoad {
  PredictionTable table;
  ValidationReport report;
  std::vector<RawResponse> raw_responses;
};

/// `fallback_model_id` is used when no record carries a model_id.
PredictionLoad read_predictions(std::istream& in, std::span<const Quadruple> manifest,
                                const std::string& fallback_model_id,
                                const std::string& source = "<stream>");
PredictionLoad load_predictions(const std::filesystem::path& path,
                                std::span<const Quadruple> manifest);

/// Writes one record per entry in key order. Invalid entries are written with
/// an empty raw_text so that reloading reproduces the label.
void write_predictions(std::ostream& out, const PredictionTable& table);

}  // namespace quadeval
