// Acceptance checks: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "coverage_study.hpp"
#include "naive_oracle.hpp"
#include "quadeval/diagnostics.hpp"
#include "quadeval/ingest.hpp"
#include "quadeval/report.hpp"
#include "quadeval/runner_protocol.hpp"
#include "scripted_channel.hpp"
#include "test_support.hpp"

using namespace quadeval;
using namespace quadeval::testing;
namespace fs = std::filesystem;

namespace {

// Collects the first failure message of a check.
struct Check {
  std::string failure;
  void expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(const char* id, const char* title, const std::function<void(Check&)>& body, double limit_s) {
  Check c;
  auto start = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_s > 0) c.expect(secs < limit_s, "took " + std::to_string(secs) + " s");
  bool ok = c.failure.empty();
  failures += !ok;
  std::printf("[%s] %s %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", id, title, secs, ok ? "" : ": ",
              c.failure.c_str());
  std::fflush(stdout);
}

void ac1(Check& c) {
  Manifest m = make_full_scale_manifest();
  std::stringstream io;
  for (const auto& q : m) io << manifest_record_json(q) << '\n';
  ValidationReport r = validate_manifest(read_manifest(io, "full-scale"));
  c.expect(r.ok(), "manifest has findings");
  c.expect(r.quadruple_count == 1776, "quadruple count " + std::to_string(r.quadruple_count));
  c.expect(r.scene_count == 305, "scene count " + std::to_string(r.scene_count));
  c.expect(r.instance_count == 7104, "instance count " + std::to_string(r.instance_count));
}

void ac2(Check& c) {
  std::mt19937_64 rng(1000);
  for (int trial = 0; trial < 1000 && c.failure.empty(); ++trial) {
    auto outcomes = random_outcomes(rng, 1 + rng() % 64, (trial % 4) * 0.1);
    auto o = oracle::evaluate(outcomes);
    auto k = classification_scores(outcomes);
    auto cs = consistency_scores(outcomes);
    auto f = failure_profile(outcomes);
    auto s = sensitivity_scores(outcomes);
    std::string t = "trial " + std::to_string(trial) + ": ";
    c.expect(oracle::same(o.quad_acc, cs.quad_acc), t + "quad_acc");
    c.expect(oracle::same(o.contr_q_pos, cs.contr_q_pos), t + "contr_q_pos");
    c.expect(oracle::same(o.reject_q_neg, cs.reject_q_neg), t + "reject_q_neg");
    c.expect(oracle::same(o.contr_v_pos, cs.contr_v_pos), t + "contr_v_pos");
    c.expect(oracle::same(o.reject_v_neg, cs.reject_v_neg), t + "reject_v_neg");
    c.expect(oracle::same(o.video_consistency, cs.video_consistency), t + "video_consistency");
    c.expect(oracle::same(o.question_consistency, cs.question_consistency), t + "question_consistency");
    c.expect(o.tp == k.tp && o.fp == k.fp && o.tn == k.tn && o.fn == k.fn && o.invalid == k.invalid,
             t + "confusion counts");
    c.expect(oracle::same(o.balanced_accuracy, k.balanced_accuracy), t + "balanced_accuracy");
    // MCC compared exactly through its sign and square.
    __int128 cov = k.mcc_covariance();
    __int128 prod = k.mcc_marginal_product();
    int sign = prod == 0 ? 0 : (cov > 0) - (cov < 0);
    c.expect(sign == o.mcc_sign, t + "mcc sign");
    if (sign != 0) {
      c.expect(cov * cov * o.mcc_squared.den == prod * o.mcc_squared.num, t + "mcc magnitude");
    }
    c.expect(o.failed == f.failed_count, t + "failed count");
    c.expect(oracle::same(o.pos_omiss, f.pos_omiss), t + "pos_omiss");
    c.expect(oracle::same(o.pos_swap, f.pos_swap), t + "pos_swap");
    c.expect(oracle::same(o.neg_hall, f.neg_hall), t + "neg_hall");
    c.expect(oracle::same(o.me_viol, f.me_viol), t + "me_viol");
    c.expect(oracle::same(o.vs, s.vs), t + "vs");
    c.expect(oracle::same(o.qs, s.qs), t + "qs");
    c.expect(oracle::same(o.vri, s.vri), t + "vri");
    c.expect(oracle::same(o.gvrs, s.gvrs), t + "gvrs");
    c.expect(oracle::same(o.sve, s.sve), t + "sve");
  }
}

void ac3(Check& c) {
  const Fraction one(1), zero(0), half(1, 2);
  auto perfect = uniform_outcomes(50, kPerfect);
  auto cs = consistency_scores(perfect);
  for (const Fraction& f : {cs.quad_acc, cs.contr_q_pos, cs.reject_q_neg, cs.contr_v_pos, cs.reject_v_neg,
                            cs.video_consistency, cs.question_consistency}) {
    c.expect(f == one, "perfect: consistency score " + to_string(f));
  }
  c.expect(classification_scores(perfect).mcc_score == 1.0, "perfect: mcc_score");
  c.expect(failure_profile(perfect).failed_count == 0, "perfect: failure set not empty");

  auto no = uniform_outcomes(50, kAlwaysNo);
  cs = consistency_scores(no);
  auto k = classification_scores(no);
  auto f = failure_profile(no);
  c.expect(cs.quad_acc == zero, "always-No: quad_acc");
  c.expect(cs.reject_q_neg == one, "always-No: reject_q_neg");
  c.expect(cs.video_consistency == half && cs.question_consistency == half, "always-No: consistency");
  c.expect(f.pos_omiss == one, "always-No: pos_omiss");
  c.expect(k.balanced_accuracy == half, "always-No: balanced_accuracy");
  c.expect(k.mcc_score == 0.25, "always-No: mcc_score");

  auto yes = uniform_outcomes(50, kAlwaysYes);
  f = failure_profile(yes);
  c.expect(f.pos_swap == one && f.neg_hall == one && f.me_viol == one, "always-Yes: failure rates");
  c.expect(classification_scores(yes).mcc_score == 0.25, "always-Yes: mcc_score");
}

void ac4(Check& c) {
  // Expected flags from the definitions, evaluated independently per pattern.
  for (const Pattern& p : all_concrete_patterns()) {
    int pp = p[0] == Y, pm = p[1] == Y, mp = p[2] == Y, mm = p[3] == Y;
    FailureFlags f = failure_flags(outcome_of(p));
    std::string name = std::to_string(pp) + std::to_string(pm) + std::to_string(mp) + std::to_string(mm);
    c.expect(f.pos_omiss == !pp, name + " pos_omiss");
    c.expect(f.pos_swap == static_cast<bool>(pm), name + " pos_swap");
    c.expect(f.neg_hall == (mp || mm), name + " neg_hall");
    c.expect(f.me_viol == ((pp && pm) || (mp && mm)), name + " me_viol");
  }
}

void ac5(Check& c) {
  Manifest m = make_manifest(40, 3);
  std::mt19937_64 rng(5);
  PredictionTable t = uniform_table(m, kPerfect);
  for (const auto& q : m) {
    auto o = random_outcomes(rng, 1)[0];
    set_pattern(t, q.id, {o.y_pp, o.y_pm, o.y_mp, o.y_mm});
  }
  auto outcomes = build_outcomes(m, t);
  BootstrapConfig config{2000, 0.95, 42};
  c.expect(bootstrap_metrics(outcomes, m, config) == bootstrap_metrics(outcomes, m, config),
           "intervals differ under a fixed seed");
  SceneCorpus corpus = group_by_scene(outcomes, m);
  c.expect(bootstrap_replicates(corpus, config) == bootstrap_replicates_serial(corpus, config),
           "parallel and serial kernels differ");

  Manifest same = make_manifest(25, 2);
  for (const auto& [name, est] : bootstrap_metrics(build_outcomes(same, uniform_table(same, {Y, Y, N, N})), same, config)) {
    if (est.lower) c.expect(*est.lower == *est.upper, "nonzero width for identical scenes: " + name);
  }

  SceneCorpus two;
  two.scene_ids = {"a", "b"};
  two.tallies = {tally(outcome_of(kPerfect)), tally(outcome_of(kAlwaysNo))};
  double counts[3] = {0, 0, 0};
  for (const auto& row : bootstrap_replicates(two, {2000, 0.95, 9})) {
    counts[static_cast<int>(*row[static_cast<std::size_t>(Metric::quad_acc)] * 2 + 0.5)] += 1;
  }
  const double w[3] = {0.25, 0.5, 0.25};
  for (int i = 0; i < 3; ++i) {
    double sigma = std::sqrt(2000 * w[i] * (1 - w[i]));
    c.expect(std::abs(counts[i] - 2000 * w[i]) <= 3 * sigma, "two-scene weight " + std::to_string(i));
  }

  CoverageResult cov = quad_acc_coverage(200, 2000, 7);
  c.expect(cov.rate() >= 0.90 && cov.rate() <= 0.99, "coverage " + std::to_string(cov.rate()));
}

void ac6(Check& c) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    std::map<std::string, double> e;
    for (int k = 0; k < 1 + i % 5; ++k) e["tok" + std::to_string(k)] = g(rng);
    LogitVector x(e);
    c.expect(fuse(x, x, std::abs(g(rng))) == x, "fuse(x, x, a) != x");
  }

  Manifest m = make_manifest(25, 1);
  std::ostringstream transcript;
  std::vector<AnswerLabel> vanilla;
  for (const auto& q : m) {
    for (Cell cell : kAllCells) {
      double yes = g(rng), no = g(rng);
      vanilla.push_back(yes > no ? AnswerLabel::yes : AnswerLabel::no);
      ScriptedChannel ch({{{{"Yes", yes}, {"No", no}}, {{"Yes", g(rng)}, {"No", g(rng)}}}});
      decode_binary(ch, make_request({q.id, cell}, m, FusionMode::c_tcd), {0.0}, kDefaultMaxSteps, &transcript);
    }
  }
  std::istringstream in(transcript.str());
  auto sessions = read_sessions(in);
  c.expect(sessions.size() == 100, "expected 100 sessions");
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    c.expect(replay_session(sessions[i], 0.0) == vanilla[i], "replay at alpha 0 differs from vanilla");
  }

  std::ostringstream one;
  ScriptedChannel ch({{{{"Yes", 0.2}, {"No", 0.0}}, {{"Yes", 1.0}, {"No", 0.0}}}});
  decode_binary(ch, {"crossing", CellKey{{"s", 0}, kAllCells[0]}, "v", {"w", ""}, "q"}, {0.0},
                kDefaultMaxSteps, &one);
  std::istringstream one_in(one.str());
  RecordedSession s = read_sessions(one_in).at(0);
  c.expect(replay_session(s, 0.0) == AnswerLabel::yes, "crossing fixture is not Yes at alpha 0");
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    double mid = (lo + hi) / 2;
    (replay_session(s, mid) == AnswerLabel::yes ? lo : hi) = mid;
  }
  c.expect(std::abs(lo - 0.25) <= 1e-9, "crossing at " + std::to_string(lo));
  c.expect(replay_session(s, 0.25 + 1e-9) == AnswerLabel::no, "not No just past 0.25");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ac7(Check& c) {
  c.expect(format_percent_ci(0.2585, 0.2432, 0.2742) == "25.85 [24.32, 27.42]", "CI row formatting");

  Manifest m = make_manifest(30, 2);
  std::mt19937_64 rng(7);
  PredictionTable t = uniform_table(m, kPerfect, "det-model");
  for (const auto& q : m) {
    auto o = random_outcomes(rng, 1)[0];
    set_pattern(t, q.id, {o.y_pp, o.y_pm, o.y_mp, o.y_mm});
  }

#ifdef QUADEVAL_CLI
  fs::path dir = fs::temp_directory_path() / "quadeval_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream mf(dir / "manifest.jsonl");
    for (const auto& q : m) mf << manifest_record_json(q) << '\n';
    std::ofstream pf(dir / "preds.jsonl");
    write_predictions(pf, t);
  }
  std::string base = std::string(QUADEVAL_CLI) + " eval --manifest " + (dir / "manifest.jsonl").string() +
                     " --predictions " + (dir / "preds.jsonl").string() + " --seed 3 --replicates 500 --out-dir ";
  for (const char* run : {"run1", "run2"}) {
    int status = std::system((base + (dir / run).string()).c_str());
    c.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, std::string("eval failed in ") + run);
  }
  std::string a = slurp(dir / "run1" / "det-model.report.json");
  c.expect(!a.empty(), "no report written");
  c.expect(a == slurp(dir / "run2" / "det-model.report.json"), "report files differ");
#else
  auto render = [&] {
    return render_report_json(run_eval(m, std::vector{t}, BootstrapConfig{500, 0.95, 3}).at(0));
  };
  c.expect(render() == render(), "reports differ");
#endif
}

}  // namespace

int main() {
  report("AC1", "structural identity of a 1,776-quadruple manifest", ac1, 1.0);
  report("AC2", "metrics match the naive oracle on 1,000 random tables", ac2, 30.0);
  report("AC3", "degenerate-model fixtures", ac3, 0);
  report("AC4", "failure-mode truth table over 16 patterns", ac4, 0);
  report("AC5", "bootstrap determinism, zero width, multinomial weights, coverage", ac5, 300.0);
  report("AC6", "fusion identities and alpha replay", ac6, 0);
  report("AC7", "report determinism and CI formatting", ac7, 0);
  return failures == 0 ? 0 : 1;
}
