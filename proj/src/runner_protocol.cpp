#include "quadeval/runner_protocol.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <istream>
#include <ostream>

#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <json.hpp>

#include "quadeval/ingest.hpp"

namespace quadeval {

using nlohmann::json;

namespace {

std::string get_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw ProtocolError(std::string("field '") + field + "' missing or not a string");
  }
  return it->get<std::string>();
}

std::uint32_t get_step(const json& j) {
  auto it = j.find("step");
  if (it == j.end() || !it->is_number_unsigned()) {
    throw ProtocolError("field 'step' missing or not a non-negative integer");
  }
  return it->get<std::uint32_t>();
}

std::map<std::string, double> get_logits(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_object()) {
    throw ProtocolError(std::string("field '") + field + "' missing or not an object");
  }
  std::map<std::string, double> out;
  for (const auto& [token, value] : it->items()) {
    if (!value.is_number()) throw ProtocolError("logit for '" + token + "' is not a number");
    out.emplace(token, value.get<double>());
  }
  return out;
}

json encode_init(const InitMessage& m) {
  json j = {{"type", "init"},
            {"session_id", m.session_id},
            {"video_ref", m.video_ref},
            {"contrast_video_ref", m.contrast_video_ref},
            {"mode", std::string(to_string(m.mode))},
            {"question_text", m.question_text},
            {"alpha", m.alpha}};
  if (!m.degradation.empty()) j["degradation"] = m.degradation;
  if (m.instance) {
    j["scene_id"] = m.instance->id.scene_id;
    j["pair_index"] = m.instance->id.pair_index;
    j["video_variant"] = std::string(to_string(m.instance->cell.video));
    j["question_variant"] = std::string(to_string(m.instance->cell.question));
  }
  return j;
}

InitMessage decode_init(const json& j) {
  InitMessage m;
  m.session_id = get_string(j, "session_id");
  m.video_ref = get_string(j, "video_ref");
  m.contrast_video_ref = get_string(j, "contrast_video_ref");
  auto mode = parse_fusion_mode(get_string(j, "mode"));
  if (!mode) throw ProtocolError("unknown mode");
  m.mode = *mode;
  m.question_text = get_string(j, "question_text");
  if (j.contains("degradation")) m.degradation = get_string(j, "degradation");
  if (j.contains("alpha")) {
    if (!j["alpha"].is_number()) throw ProtocolError("field 'alpha' is not a number");
    m.alpha = j["alpha"].get<double>();
  }
  if (j.contains("scene_id")) {
    CellKey key;
    key.id.scene_id = get_string(j, "scene_id");
    auto idx = j.find("pair_index");
    if (idx == j.end() || !idx->is_number_unsigned()) throw ProtocolError("bad 'pair_index'");
    key.id.pair_index = idx->get<std::uint32_t>();
    auto vv = parse_variant(get_string(j, "video_variant"));
    auto qv = parse_variant(get_string(j, "question_variant"));
    if (!vv || !qv) throw ProtocolError("unknown cell variant");
    key.cell = {*vv, *qv};
    m.instance = key;
  }
  return m;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

bool has_label_token(const LogitVector& v, AnswerLabel wanted) {
  for (const auto& [token, _] : v.entries()) {
    if (parse_answer(token) == wanted) return true;
  }
  return false;
}

}  // namespace

std::string encode_message(const Message& message) {
  json j = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, InitMessage>) {
          return encode_init(m);
        } else if constexpr (std::is_same_v<T, StepLogitsMessage>) {
          return {{"type", "step_logits"},
                  {"session_id", m.session_id},
                  {"step", m.step},
                  {"logits_ori", m.logits_ori},
                  {"logits_con", m.logits_con}};
        } else if constexpr (std::is_same_v<T, ChosenMessage>) {
          return {{"type", "chosen"}, {"session_id", m.session_id}, {"step", m.step}, {"token", m.token}};
        } else if constexpr (std::is_same_v<T, EndMessage>) {
          json e = {{"type", "end"}, {"session_id", m.session_id}, {"reason", m.reason}};
          if (!m.detail.empty()) e["detail"] = m.detail;
          return e;
        } else {
          return {{"type", "cancel"}, {"session_id", m.session_id}};
        }
      },
      message);
  return j.dump();
}

Message decode_message(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message is not an object");
  std::string type = get_string(j, "type");

  if (type == "init") return decode_init(j);
  if (type == "step_logits") {
    return StepLogitsMessage{get_string(j, "session_id"), get_step(j), get_logits(j, "logits_ori"),
                             get_logits(j, "logits_con")};
  }
  if (type == "chosen") {
    return ChosenMessage{get_string(j, "session_id"), get_step(j), get_string(j, "token")};
  }
  if (type == "end") {
    EndMessage m{get_string(j, "session_id"), get_string(j, "reason"), {}};
    if (m.reason != "eos" && m.reason != "error") throw ProtocolError("unknown end reason '" + m.reason + "'");
    if (j.contains("detail")) m.detail = get_string(j, "detail");
    return m;
  }
  if (type == "cancel") return CancelMessage{get_string(j, "session_id")};
  throw ProtocolError("unknown message type '" + type + "'");
}

// ---------------------------------------------------------------------------

ProcessChannel::ProcessChannel(const std::string& command) {
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw DecodeError(std::string("pipe: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw DecodeError(std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) throw DecodeError(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ProcessChannel::~ProcessChannel() { close(); }

void ProcessChannel::send(const std::string& line) {
  if (to_child_ < 0) throw ProtocolError("runner input already closed");
  std::string data = line + "\n";
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    ssize_t n = ::write(to_child_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("writing to runner: ") + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::optional<std::string> ProcessChannel::receive() {
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (from_child_ < 0) break;
    char chunk[4096];
    ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("reading from runner: ") + std::strerror(errno));
    }
    if (n == 0) {
      ::close(from_child_);
      from_child_ = -1;
      break;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  if (buffer_.empty()) return std::nullopt;
  std::string rest = std::move(buffer_);
  buffer_.clear();
  return rest;
}

int ProcessChannel::close() {
  if (status_) return *status_;
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  int status = 0;
  if (pid_ > 0) {
    while (waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }
  status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return *status_;
}

// ---------------------------------------------------------------------------

DecodeResult decode_binary(RunnerChannel& runner, const SessionRequest& request,
                           const FusionConfig& config, std::size_t max_steps,
                           std::ostream* transcript) {
  config.validate();
  auto send = [&](const Message& m) {
    std::string line = encode_message(m);
    if (transcript) *transcript << line << '\n';
    runner.send(line);
  };
  auto violation = [&](const std::string& what) {
    return ProtocolError("session '" + request.session_id + "': " + what);
  };

  InitMessage init;
  init.session_id = request.session_id;
  init.video_ref = request.video_ref;
  init.contrast_video_ref = request.contrast.video_ref;
  init.degradation = request.contrast.degradation;
  init.mode = config.mode;
  init.question_text = request.question_text;
  init.alpha = config.alpha;
  init.instance = request.instance;
  send(init);

  DecodeResult result;
  std::uint32_t step = 0;
  for (;;) {
    std::optional<std::string> line = runner.receive();
    if (!line) throw violation("runner closed the stream mid-session");
    if (transcript) *transcript << *line << '\n';

    Message message;
    try {
      message = decode_message(*line);
    } catch (const ProtocolError& e) {
      throw violation(e.what());
    }

    if (auto* end = std::get_if<EndMessage>(&message)) {
      if (end->session_id != request.session_id) throw violation("end for another session");
      if (end->reason == "error") {
        throw RunnerError("session '" + request.session_id + "': runner error: " + end->detail);
      }
      break;
    }
    auto* logits = std::get_if<StepLogitsMessage>(&message);
    if (!logits) throw violation("unexpected message from runner");
    if (logits->session_id != request.session_id) throw violation("logits for another session");
    if (logits->step != step) {
      throw violation(fmt::format("expected step {}, got {}", step, logits->step));
    }
    if (step == max_steps) {
      send(CancelMessage{request.session_id});
      result.step_limit_hit = true;
      break;
    }

    std::string token;
    try {
      LogitVector ori(logits->logits_ori);
      LogitVector con(logits->logits_con);
      if (step == 0 && (!has_label_token(ori, AnswerLabel::yes) ||
                        !has_label_token(ori, AnswerLabel::no))) {
        throw DecodeError("candidate tokens must include a yes and a no surface form");
      }
      token = select_token(fuse(ori, con, config.alpha));
    } catch (const ProtocolError&) {
      throw;
    } catch (const DecodeError& e) {
      throw violation(fmt::format("step {}: {}", step, e.what()));
    }
    result.tokens.push_back(token);
    send(ChosenMessage{request.session_id, step, token});
    ++step;
  }

  result.label = parse_answer(join_tokens(result.tokens));
  return result;
}

std::string session_id_for(const CellKey& instance) {
  return fmt::format("{}#{}/{}-{}", instance.id.scene_id, instance.id.pair_index,
                     to_string(instance.cell.video), to_string(instance.cell.question));
}

SessionRequest make_request(const CellKey& instance, std::span<const Quadruple> manifest,
                            FusionMode mode) {
  SessionRequest req;
  req.session_id = session_id_for(instance);
  req.instance = instance;
  req.video_ref = original_video(instance, manifest);
  req.contrast = contrast_selector(instance, manifest, mode);
  for (const auto& q : manifest) {
    if (q.id == instance.id) {
      req.question_text =
          format_prompt(instance.cell.question == Variant::pos ? q.q_pos_text : q.q_neg_text);
      break;
    }
  }
  return req;
}

// ---------------------------------------------------------------------------

AnswerLabel RecordedSession::recorded_label() const {
  return parse_answer(join_tokens(chosen_tokens));
}

std::vector<RecordedSession> read_sessions(std::istream& in) {
  std::vector<RecordedSession> sessions;
  std::optional<RecordedSession> open;
  std::string line;
  std::size_t index = 0;

  auto fail = [&](const std::string& what) {
    return ProtocolError(fmt::format("session file message {}: {}", index, what));
  };
  auto expect_open = [&](const std::string& session_id) -> RecordedSession& {
    if (!open) throw fail("message outside a session");
    if (open->init.session_id != session_id) throw fail("message for session '" + session_id +
                                                        "' inside session '" +
                                                        open->init.session_id + "'");
    return *open;
  };

  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++index;
    Message message;
    try {
      message = decode_message(line);
    } catch (const ProtocolError& e) {
      throw fail(e.what());
    }

    if (auto* init = std::get_if<InitMessage>(&message)) {
      if (open) throw fail("init before session '" + open->init.session_id + "' ended");
      open = RecordedSession{};
      open->init = *init;
    } else if (auto* step = std::get_if<StepLogitsMessage>(&message)) {
      RecordedSession& s = expect_open(step->session_id);
      if (step->step != s.steps.size()) throw fail("step numbers out of order");
      s.steps.push_back(*step);
    } else if (auto* chosen = std::get_if<ChosenMessage>(&message)) {
      RecordedSession& s = expect_open(chosen->session_id);
      if (chosen->step != s.chosen_tokens.size() || chosen->step >= s.steps.size()) {
        throw fail("chosen token without matching step");
      }
      s.chosen_tokens.push_back(chosen->token);
    } else if (auto* end = std::get_if<EndMessage>(&message)) {
      RecordedSession& s = expect_open(end->session_id);
      s.end = *end;
      sessions.push_back(std::move(s));
      open.reset();
    } else if (auto* cancel = std::get_if<CancelMessage>(&message)) {
      RecordedSession& s = expect_open(cancel->session_id);
      s.cancelled = true;
      sessions.push_back(std::move(s));
      open.reset();
    }
  }
  if (open) {
    ++index;
    throw fail("session '" + open->init.session_id + "' is not terminated");
  }
  return sessions;
}

ReplayChannel::ReplayChannel(const RecordedSession& session) : session_(session) {}

void ReplayChannel::send(const std::string&) {}

std::optional<std::string> ReplayChannel::receive() {
  if (next_step_ < session_.steps.size()) return encode_message(session_.steps[next_step_++]);
  if (ended_) return std::nullopt;
  ended_ = true;
  if (session_.end) return encode_message(*session_.end);
  return encode_message(EndMessage{session_.init.session_id, "eos", {}});
}

AnswerLabel replay_session(const RecordedSession& session, double alpha, std::size_t max_steps) {
  ReplayChannel channel(session);
  SessionRequest req;
  req.session_id = session.init.session_id;
  req.instance = session.init.instance;
  req.video_ref = session.init.video_ref;
  req.contrast = {session.init.contrast_video_ref, session.init.degradation};
  req.question_text = session.init.question_text;
  return decode_binary(channel, req, FusionConfig{alpha, session.init.mode}, max_steps).label;
}

std::string replay_model_id(FusionMode mode, double alpha) {
  return fmt::format("decode-{}-a{}", to_string(mode), alpha);
}

std::vector<PredictionTable> replay_decode(std::span<const RecordedSession> sessions,
                                           std::span<const double> alphas,
                                           std::size_t max_steps) {
  std::optional<FusionMode> mode;
  bool mixed = false;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    if (!sessions[i].init.instance) {
      throw ProtocolError(fmt::format("session {} ('{}') has no benchmark instance", i + 1,
                                      sessions[i].init.session_id));
    }
    if (mode && *mode != sessions[i].init.mode) mixed = true;
    mode = sessions[i].init.mode;
  }

  std::vector<PredictionTable> tables;
  for (double alpha : alphas) {
    PredictionTable table;
    table.model_id = mixed ? fmt::format("decode-mixed-a{}", alpha)
                           : replay_model_id(mode.value_or(FusionMode::c_tcd), alpha);
    for (const auto& s : sessions) {
      AnswerLabel label = replay_session(s, alpha, max_steps);
      auto [it, inserted] = table.entries.emplace(*s.init.instance, label);
      if (!inserted && it->second != label) {
        throw ProtocolError("conflicting replayed labels for session '" + s.init.session_id + "'");
      }
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

}  // namespace quadeval
