#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "quadeval/bench_model.hpp"
#include "quadeval/decode.hpp"

namespace quadeval {

class ProtocolError : public DecodeError {
public:
  using DecodeError::DecodeError;
};

/// The runner reported a failure through `end` with reason "error".
class RunnerError : public DecodeError {
public:
  using DecodeError::DecodeError;
};

// Wire messages. Each is one JSON object per line with a "type" field.

struct InitMessage {
  std::string session_id;
  std::string video_ref;
  std::string contrast_video_ref;
  FusionMode mode = FusionMode::c_tcd;
  std::string question_text;
  std::string degradation;
  double alpha = 0.0;
  // Absent for sessions that are not tied to a benchmark instance.
  std::optional<CellKey> instance;
};

struct StepLogitsMessage {
  std::string session_id;
  std::uint32_t step = 0;
  std::map<std::string, double> logits_ori;
  std::map<std::string, double> logits_con;
};

struct ChosenMessage {
  std::string session_id;
  std::uint32_t step = 0;
  std::string token;
};

struct EndMessage {
  std::string session_id;
  std::string reason;  // "eos" or "error"
  std::string detail;
};

/// Engine to runner: the step limit was reached, stop this session.
struct CancelMessage {
  std::string session_id;
};

using Message =
    std::variant<InitMessage, StepLogitsMessage, ChosenMessage, EndMessage, CancelMessage>;

std::string encode_message(const Message& m);

/// Throws ProtocolError on malformed JSON, unknown type or bad fields.
Message decode_message(std::string_view line);

/// A line-oriented byte stream to a runner.
class RunnerChannel {
public:
  virtual ~RunnerChannel() = default;
  virtual void send(const std::string& line) = 0;
  /// Next line from the runner, or empty at end of stream.
  virtual std::optional<std::string> receive() = 0;
};

/// Runs `command` through /bin/sh with its stdin/stdout connected to the engine.
class ProcessChannel : public RunnerChannel {
public:
  explicit ProcessChannel(const std::string& command);
  ~ProcessChannel() override;

  ProcessChannel(const ProcessChannel&) = delete;
  ProcessChannel& operator=(const ProcessChannel&) = delete;

  void send(const std::string& line) override;
  std::optional<std::string> receive() override;

  /// Closes the runner's stdin and waits for it; returns its exit status.
  int close();

private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::optional<int> status_;
};

struct SessionRequest {
  std::string session_id;
  std::optional<CellKey> instance;
  std::string video_ref;
  ContrastInput contrast;
  std::string question_text;
};

struct DecodeResult {
  AnswerLabel label = AnswerLabel::invalid;
  std::vector<std::string> tokens;
  bool step_limit_hit = false;
};

inline constexpr std::size_t kDefaultMaxSteps = 8;

/// Drives one session: init, then per step fuse the paired logits, pick a
/// token and send it back, until the runner ends the answer or `max_steps`
/// tokens have been chosen. Every line in both directions is appended to
/// `transcript` when given.
DecodeResult decode_binary(RunnerChannel& runner, const SessionRequest& request,
                           const FusionConfig& config, std::size_t max_steps = kDefaultMaxSteps,
                           std::ostream* transcript = nullptr);

/// Builds the request for one benchmark instance.
SessionRequest make_request(const CellKey& instance, std::span<const Quadruple> manifest,
                            FusionMode mode);

std::string session_id_for(const CellKey& instance);

struct RecordedSession {
  InitMessage init;
  std::vector<StepLogitsMessage> steps;
  std::vector<std::string> chosen_tokens;
  std::optional<EndMessage> end;
  bool cancelled = false;

  /// Label the recorded run produced.
  AnswerLabel recorded_label() const;
};

/// Parses a transcript of one or more sessions. Errors name the 1-based
/// message index.
std::vector<RecordedSession> read_sessions(std::istream& in);

/// Serves a recorded session's runner-side messages in order.
class ReplayChannel : public RunnerChannel {
public:
  explicit ReplayChannel(const RecordedSession& session);

  void send(const std::string& line) override;
  std::optional<std::string> receive() override;

private:
  const RecordedSession& session_;
  std::size_t next_step_ = 0;
  bool ended_ = false;
};

AnswerLabel replay_session(const RecordedSession& session, double alpha,
                           std::size_t max_steps = kDefaultMaxSteps);

/// One prediction table per alpha, in `alphas` order. Every session must
/// carry its benchmark instance.
std::vector<PredictionTable> replay_decode(std::span<const RecordedSession> sessions,
                                           std::span<const double> alphas,
                                           std::size_t max_steps = kDefaultMaxSteps);

std::string replay_model_id(FusionMode mode, double alpha);

}  // namespace quadeval
