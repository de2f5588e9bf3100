#include "quadeval/report.hpp"

#include <algorithm>
#include <exception>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "quadeval/ingest.hpp"

namespace quadeval {

namespace {

std::string fixed4(double v) {
  std::string s = fmt::format("{:.4f}", v);
  return s == "-0.0000" ? "0.0000" : s;
}

std::string quote(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

// Minimal JSON emitter with caller-controlled key order and number text.
class JsonOut {
public:
  void open(std::string_view key = {}) {
    prefix(key);
    out_ += '{';
    first_.push_back(true);
  }
  void close() {
    bool empty = first_.back();
    first_.pop_back();
    if (!empty) newline();
    out_ += '}';
  }
  void raw(std::string_view key, std::string_view token) {
    prefix(key);
    out_ += token;
  }
  void str(std::string_view key, std::string_view value) { raw(key, quote(value)); }
  void frac(std::string_view key, const Fraction& f) { raw(key, f.to_fixed(4)); }
  void frac(std::string_view key, const std::optional<Fraction>& f) {
    raw(key, f ? f->to_fixed(4) : "null");
  }
  void num(std::string_view key, double v) { raw(key, fixed4(v)); }
  void num(std::string_view key, const std::optional<double>& v) { raw(key, v ? fixed4(*v) : "null"); }
  void integer(std::string_view key, long long v) { raw(key, std::to_string(v)); }

  std::string finish() { return out_ + "\n"; }

private:
  void newline() {
    out_ += '\n';
    out_.append(2 * first_.size(), ' ');
  }
  void prefix(std::string_view key) {
    if (!first_.empty()) {
      if (!first_.back()) out_ += ',';
      first_.back() = false;
      newline();
    }
    if (!key.empty()) {
      out_ += quote(key);
      out_ += ": ";
    }
  }

  std::string out_;
  std::vector<bool> first_;
};

void write_consistency(JsonOut& j, const ConsistencyScores& c) {
  j.open("consistency");
  j.frac("contr_q_pos", c.contr_q_pos);
  j.frac("contr_v_pos", c.contr_v_pos);
  j.frac("quad_acc", c.quad_acc);
  j.frac("question_consistency", c.question_consistency);
  j.frac("reject_q_neg", c.reject_q_neg);
  j.frac("reject_v_neg", c.reject_v_neg);
  j.frac("video_consistency", c.video_consistency);
  j.close();
}

void write_classification(JsonOut& j, const ClassificationScores& c) {
  j.open("classification");
  j.frac("balanced_accuracy", c.balanced_accuracy);
  j.integer("fn", c.fn);
  j.integer("fp", c.fp);
  j.integer("invalid", c.invalid);
  j.num("mcc", c.mcc);
  j.num("mcc_score", c.mcc_score);
  j.integer("tn", c.tn);
  j.integer("tp", c.tp);
  j.close();
}

}  // namespace

std::string canonical_manifest(std::span<const Quadruple> manifest) {
  std::vector<const Quadruple*> sorted;
  sorted.reserve(manifest.size());
  for (const auto& q : manifest) sorted.push_back(&q);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Quadruple* a, const Quadruple* b) { return a->id < b->id; });
  std::string out;
  for (const Quadruple* q : sorted) {
    out += manifest_record_json(*q);
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

MetricReport build_report(std::span<const Quadruple> manifest, const PredictionTable& table,
                          const std::optional<BootstrapConfig>& bootstrap,
                          const std::string& manifest_digest) {
  std::vector<QuadOutcome> outcomes = build_outcomes(manifest, table);
  OutcomeTally total = tally(outcomes);

  MetricReport r;
  r.model_id = table.model_id;
  std::set<std::string_view> scenes;
  for (const auto& q : manifest) scenes.insert(q.id.scene_id);
  r.scenes = scenes.size();
  r.quadruples = manifest.size();
  r.consistency = consistency_from(total);
  r.classification = classification_from(total);
  r.failure = failure_from(total);
  r.sensitivity = sensitivity_from(total);
  r.per_category = per_category(outcomes, manifest);
  r.provenance.manifest_sha256 = manifest_digest;
  if (bootstrap) {
    r.intervals = bootstrap_metrics(outcomes, manifest, *bootstrap);
    r.provenance.config["replicates"] = std::to_string(bootstrap->replicates);
    r.provenance.config["confidence"] = fmt::format("{}", bootstrap->confidence);
    r.provenance.config["seed"] = std::to_string(bootstrap->seed);
  }
  return r;
}

std::vector<MetricReport> run_eval(std::span<const Quadruple> manifest,
                                   std::span<const PredictionTable> tables,
                                   const std::optional<BootstrapConfig>& bootstrap) {
  std::vector<const PredictionTable*> ordered;
  for (const auto& t : tables) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const PredictionTable* a, const PredictionTable* b) { return a->model_id < b->model_id; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->model_id == ordered[i - 1]->model_id) {
      throw std::invalid_argument("duplicate model_id '" + ordered[i]->model_id + "'");
    }
  }

  const std::string digest = sha256_hex(canonical_manifest(manifest));
  std::vector<MetricReport> reports(ordered.size());
  std::vector<std::exception_ptr> errors(ordered.size());
  const auto n = static_cast<std::int64_t>(ordered.size());

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      reports[k] = build_report(manifest, *ordered[k], bootstrap, digest);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

std::string format_percent(double fraction) {
  std::string s = fmt::format("{:.2f}", fraction * 100.0);
  return s == "-0.00" ? "0.00" : s;
}

std::string format_percent_ci(double point, double lower, double upper) {
  return format_percent(point) + " [" + format_percent(lower) + ", " + format_percent(upper) + "]";
}

std::string render_report_json(const MetricReport& r) {
  JsonOut j;
  j.open();
  write_classification(j, r.classification);
  write_consistency(j, r.consistency);
  j.integer("failed_count", r.failure.failed_count);

  j.open("failure");
  j.frac("me_viol", r.failure.me_viol);
  j.frac("neg_hall", r.failure.neg_hall);
  j.frac("pos_omiss", r.failure.pos_omiss);
  j.frac("pos_swap", r.failure.pos_swap);
  j.close();

  j.open("failure_normalized");
  std::map<std::string, std::optional<Fraction>> shares;
  for (const auto& share : failure_composition(r.failure)) shares[share.mode] = share.normalized_share;
  for (const auto& [mode, share] : shares) j.frac(mode, share);
  j.close();

  if (r.intervals) {
    j.open("intervals");
    for (const auto& [name, est] : *r.intervals) {
      j.open(name);
      j.integer("effective_replicates", static_cast<long long>(est.effective_replicates));
      j.num("lower", est.lower);
      j.num("point", est.point);
      j.num("upper", est.upper);
      j.close();
    }
    j.close();
  }

  j.str("model_id", r.model_id);

  j.open("per_category");
  for (const auto& [category, scores] : r.per_category) {
    j.open(to_string(category));
    write_classification(j, scores.classification);
    write_consistency(j, scores.consistency);
    j.integer("quadruples", scores.quadruples);
    j.close();
  }
  j.close();

  j.open("provenance");
  j.open("config");
  for (const auto& [k, v] : r.provenance.config) j.str(k, v);
  j.close();
  j.str("manifest_sha256", r.provenance.manifest_sha256);
  j.close();

  j.integer("quadruples", static_cast<long long>(r.quadruples));
  j.integer("scenes", static_cast<long long>(r.scenes));

  j.open("sensitivity");
  j.frac("gvrs", r.sensitivity.gvrs);
  j.frac("qs", r.sensitivity.qs);
  j.frac("sve", r.sensitivity.sve);
  j.frac("vri", r.sensitivity.vri);
  j.frac("vs", r.sensitivity.vs);
  j.close();

  j.close();
  return j.finish();
}

std::string render_report_csv(const MetricReport& r) {
  std::string out = "model_id,metric,value,percent\n";
  auto row = [&](std::string_view metric, const std::optional<double>& value) {
    std::string percent;
    std::string text;
    if (value) {
      text = fixed4(*value);
      percent = format_percent(*value);
      if (r.intervals) {
        auto it = r.intervals->find(std::string(metric));
        if (it != r.intervals->end() && it->second.lower) {
          percent = format_percent_ci(*value, *it->second.lower, *it->second.upper);
        }
      }
    }
    out += fmt::format("{},{},{},{}\n", quote(r.model_id), metric, text, quote(percent));
  };

  auto frac = [](const std::optional<Fraction>& f) -> std::optional<double> {
    if (!f) return std::nullopt;
    return f->to_double();
  };
  const auto& c = r.consistency;
  const auto& k = r.classification;
  const auto& f = r.failure;
  const auto& s = r.sensitivity;
  row("quad_acc", c.quad_acc.to_double());
  row("contr_q_pos", c.contr_q_pos.to_double());
  row("reject_q_neg", c.reject_q_neg.to_double());
  row("contr_v_pos", c.contr_v_pos.to_double());
  row("reject_v_neg", c.reject_v_neg.to_double());
  row("video_consistency", c.video_consistency.to_double());
  row("question_consistency", c.question_consistency.to_double());
  row("balanced_accuracy", frac(k.balanced_accuracy));
  row("mcc", k.mcc);
  row("mcc_score", k.mcc_score);
  row("pos_omiss", frac(f.pos_omiss));
  row("pos_swap", frac(f.pos_swap));
  row("neg_hall", frac(f.neg_hall));
  row("me_viol", frac(f.me_viol));
  row("vs", s.vs.to_double());
  row("qs", s.qs.to_double());
  row("vri", frac(s.vri));
  row("gvrs", s.gvrs.to_double());
  row("sve", s.sve.to_double());
  return out;
}

std::string render_ranking_csv(const RankingMatrix& ranking) {
  std::string out = "model_a,model_b,fraction_a_above_b\n";
  for (const auto& [pair, value] : ranking) {
    out += fmt::format("{},{},{}\n", quote(pair.first), quote(pair.second), fixed4(value));
  }
  return out;
}

std::optional<PlotKind> parse_plot_kind(std::string_view name) {
  if (name == "radar") return PlotKind::radar;
  if (name == "failure-composition") return PlotKind::failure_composition;
  if (name == "alpha-sweep") return PlotKind::alpha_sweep;
  return std::nullopt;
}

std::vector<FailureShare> failure_composition(const FailureProfile& p) {
  std::vector<FailureShare> shares = {{"pos_omiss", p.pos_omiss, {}},
                                      {"pos_swap", p.pos_swap, {}},
                                      {"neg_hall", p.neg_hall, {}},
                                      {"me_viol", p.me_viol, {}}};
  if (p.failed_count == 0) return shares;
  Fraction sum;
  for (const auto& s : shares) sum = sum + *s.raw_rate;
  if (sum == Fraction(0)) return shares;
  for (auto& s : shares) s.normalized_share = *s.raw_rate / sum;
  return shares;
}

std::string radar_csv(std::span<const MetricReport> reports) {
  std::string out = "model,category,quad_acc\n";
  for (const auto& r : reports) {
    for (const auto& [category, scores] : r.per_category) {
      out += fmt::format("{},{},{}\n", quote(r.model_id), to_string(category),
                         scores.consistency.quad_acc.to_fixed(4));
    }
  }
  return out;
}

std::string failure_composition_csv(std::span<const MetricReport> reports) {
  std::string out = "model,mode,raw_rate,normalized_share\n";
  for (const auto& r : reports) {
    for (const auto& s : failure_composition(r.failure)) {
      out += fmt::format("{},{},{},{}\n", quote(r.model_id), s.mode,
                         s.raw_rate ? s.raw_rate->to_fixed(4) : "",
                         s.normalized_share ? s.normalized_share->to_fixed(4) : "");
    }
  }
  return out;
}

std::string alpha_sweep_csv(std::span<const AlphaPoint> points) {
  std::string out = "alpha,metric,value\n";
  for (const auto& p : points) {
    const auto& c = p.report.consistency;
    const auto& ba = p.report.classification.balanced_accuracy;
    std::string a = fmt::format("{}", p.alpha);
    out += fmt::format("{},quad_acc,{}\n", a, c.quad_acc.to_fixed(4));
    out += fmt::format("{},video_consistency,{}\n", a, c.video_consistency.to_fixed(4));
    out += fmt::format("{},question_consistency,{}\n", a, c.question_consistency.to_fixed(4));
    out += fmt::format("{},balanced_accuracy,{}\n", a, ba ? ba->to_fixed(4) : "");
  }
  return out;
}

}  // namespace quadeval
