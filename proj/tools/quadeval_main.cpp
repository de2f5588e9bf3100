// Command-line front end: validate, eval, bootstrap, plot-data, decode-replay, decode-live.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "quadeval/bootstrap.hpp"
#include "quadeval/ingest.hpp"
#include "quadeval/report.hpp"
#include "quadeval/runner_protocol.hpp"

namespace fs = std::filesystem;
using namespace quadeval;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

struct Options {
  std::string manifest;
  std::vector<std::string> predictions;
  std::uint32_t replicates = 2000;
  double confidence = 0.95;
  std::optional<std::uint64_t> seed;
  std::vector<double> alphas;
  std::string mode = "c-tcd";
  std::string out_dir;
  std::string format = "report";
  std::string kind;
  std::string sessions;
  std::string runner;
  std::size_t max_steps = kDefaultMaxSteps;
};

class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string file_stem_for(std::string_view model_id) {
  std::string s(model_id);
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return s;
}

void emit(const Options& opt, const std::string& filename, const std::string& content) {
  if (opt.out_dir.empty()) {
    std::cout << content;
    return;
  }
  fs::create_directories(opt.out_dir);
  std::ofstream out(fs::path(opt.out_dir) / filename, std::ios::binary);
  if (!out) throw InputError("cannot write " + (fs::path(opt.out_dir) / filename).string());
  out << content;
}

Manifest load_valid_manifest(const std::string& path) {
  Manifest manifest = load_manifest(path);
  ValidationReport report = validate_manifest(manifest);
  for (const auto& f : report.findings) std::cerr << path << ": " << describe(f) << '\n';
  if (!report.ok()) throw InputError(fmt::format("{}: {} validation finding(s)", path, report.findings.size()));
  return manifest;
}

std::vector<PredictionTable> load_valid_tables(const Options& opt, const Manifest& manifest) {
  if (opt.predictions.empty()) throw InputError("at least one --predictions file is required");
  std::vector<PredictionTable> tables;
  std::size_t problems = 0;
  for (const auto& path : opt.predictions) {
    PredictionLoad load = load_predictions(path, manifest);
    for (const auto& f : load.report.findings) std::cerr << path << ": " << describe(f) << '\n';
    problems += load.report.findings.size();
    tables.push_back(std::move(load.table));
  }
  if (problems > 0) throw InputError(fmt::format("{} prediction finding(s)", problems));
  return tables;
}

std::optional<BootstrapConfig> bootstrap_config(const Options& opt, bool required) {
  if (!opt.seed) {
    if (required) throw InputError("--seed is required when intervals are requested");
    return std::nullopt;
  }
  BootstrapConfig config{opt.replicates, opt.confidence, *opt.seed};
  config.validate();
  return config;
}

void write_reports(const Options& opt, const std::vector<MetricReport>& reports) {
  for (const auto& r : reports) {
    if (opt.format == "csv") {
      emit(opt, file_stem_for(r.model_id) + ".csv", render_report_csv(r));
    } else {
      emit(opt, file_stem_for(r.model_id) + ".report.json", render_report_json(r));
    }
  }
}

int cmd_validate(const Options& opt) {
  Manifest manifest = load_manifest(opt.manifest);
  ValidationReport report = validate_manifest(manifest);
  std::size_t problems = report.findings.size();
  for (const auto& f : report.findings) std::cerr << opt.manifest << ": " << describe(f) << '\n';
  std::cout << fmt::format("manifest: scenes={} quadruples={} instances={}\n", report.scene_count,
                           report.quadruple_count, report.instance_count);

  for (const auto& path : opt.predictions) {
    PredictionLoad load = load_predictions(path, manifest);
    for (const auto& f : load.report.findings) std::cerr << path << ": " << describe(f) << '\n';
    problems += load.report.findings.size();
    std::cout << fmt::format("{}: model_id={} entries={} invalid={} findings={}\n", path,
                             load.table.model_id, load.table.entries.size(),
                             load.report.invalid_count, load.report.findings.size());
  }
  return problems == 0 ? kOk : kInvalid;
}

int cmd_eval(const Options& opt, bool bootstrap_required) {
  Manifest manifest = load_valid_manifest(opt.manifest);
  std::vector<PredictionTable> tables = load_valid_tables(opt, manifest);
  std::optional<BootstrapConfig> config = bootstrap_config(opt, bootstrap_required);
  write_reports(opt, run_eval(manifest, tables, config));
  if (bootstrap_required && tables.size() >= 2) {
    emit(opt, "ranking.csv", render_ranking_csv(ranking_stability(tables, manifest, *config)));
  }
  return kOk;
}

std::vector<RecordedSession> load_sessions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_sessions(in);
}

int cmd_plot_data(const Options& opt) {
  auto kind = parse_plot_kind(opt.kind);
  if (!kind) throw InputError("unknown plot kind '" + opt.kind + "'");

  Manifest manifest = load_valid_manifest(opt.manifest);
  if (*kind == PlotKind::alpha_sweep) {
    if (opt.sessions.empty() || opt.alphas.empty()) {
      throw InputError("alpha-sweep needs --sessions and at least one --alpha");
    }
    std::vector<RecordedSession> sessions = load_sessions(opt.sessions);
    std::vector<AlphaPoint> points;
    std::vector<PredictionTable> tables = replay_decode(sessions, opt.alphas, opt.max_steps);
    for (std::size_t i = 0; i < tables.size(); ++i) {
      ValidationReport check = validate_predictions(manifest, tables[i]);
      for (const auto& f : check.findings) std::cerr << opt.sessions << ": " << describe(f) << '\n';
      if (!check.ok()) throw InputError("replayed sessions do not cover the manifest");
      points.push_back({opt.alphas[i], build_report(manifest, tables[i], std::nullopt, {})});
    }
    emit(opt, "alpha-sweep.csv", alpha_sweep_csv(points));
    return kOk;
  }

  std::vector<PredictionTable> tables = load_valid_tables(opt, manifest);
  std::vector<MetricReport> reports = run_eval(manifest, tables, std::nullopt);
  if (*kind == PlotKind::radar) {
    emit(opt, "radar.csv", radar_csv(reports));
  } else {
    emit(opt, "failure-composition.csv", failure_composition_csv(reports));
  }
  return kOk;
}

int cmd_decode_replay(const Options& opt) {
  if (opt.alphas.empty()) throw InputError("at least one --alpha is required");
  std::vector<RecordedSession> sessions = load_sessions(opt.sessions);
  std::vector<PredictionTable> tables = replay_decode(sessions, opt.alphas, opt.max_steps);
  for (const auto& table : tables) {
    std::ostringstream out;
    write_predictions(out, table);
    emit(opt, file_stem_for(table.model_id) + ".predictions.jsonl", out.str());
  }
  return kOk;
}

int cmd_decode_live(const Options& opt) {
  if (opt.out_dir.empty()) throw InputError("decode-live needs --out-dir");
  if (opt.runner.empty()) throw InputError("decode-live needs --runner");
  auto mode = parse_fusion_mode(opt.mode);
  if (!mode) throw InputError("unknown mode '" + opt.mode + "'");
  std::vector<double> alphas = opt.alphas.empty() ? std::vector<double>{0.0} : opt.alphas;

  Manifest manifest = load_valid_manifest(opt.manifest);
  fs::create_directories(opt.out_dir);
  for (double alpha : alphas) {
    FusionConfig config{alpha, *mode};
    config.validate();
    PredictionTable table;
    table.model_id = replay_model_id(*mode, alpha);
    std::string stem = file_stem_for(table.model_id);
    std::ofstream transcript(fs::path(opt.out_dir) / (stem + ".sessions.jsonl"), std::ios::binary);

    ProcessChannel runner(opt.runner);
    for (const auto& q : manifest) {
      for (const Cell& cell : kAllCells) {
        CellKey key{q.id, cell};
        DecodeResult result =
            decode_binary(runner, make_request(key, manifest, *mode), config, opt.max_steps, &transcript);
        table.entries.emplace(key, result.label);
      }
    }
    int status = runner.close();
    if (status != 0) std::cerr << "runner exited with status " << status << '\n';

    std::ofstream preds(fs::path(opt.out_dir) / (stem + ".predictions.jsonl"), std::ios::binary);
    write_predictions(preds, table);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive-quadruple evaluation engine"};
  app.require_subcommand(1);
  Options opt;

  auto add_manifest = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", opt.manifest, "Manifest JSONL file")->required()->check(CLI::ExistingFile);
  };
  auto add_predictions = [&](CLI::App* cmd) {
    cmd->add_option("--predictions", opt.predictions, "Prediction JSONL file (repeatable)")
        ->check(CLI::ExistingFile);
  };
  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--out-dir", opt.out_dir, "Directory for output files (default: stdout)");
  };
  auto add_bootstrap = [&](CLI::App* cmd) {
    cmd->add_option("--replicates", opt.replicates, "Bootstrap replicates")->check(CLI::PositiveNumber);
    cmd->add_option("--confidence", opt.confidence, "Interval confidence level");
    cmd->add_option("--seed", opt.seed, "Bootstrap seed");
  };
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"report", "csv"}));
  };
  auto add_decode = [&](CLI::App* cmd) {
    cmd->add_option("--alpha", opt.alphas, "Contrast strength (repeatable)");
    cmd->add_option("--max-steps", opt.max_steps, "Decoding step limit");
  };

  auto* validate = app.add_subcommand("validate", "Check a manifest and optional prediction files");
  add_manifest(validate);
  add_predictions(validate);

  auto* eval = app.add_subcommand("eval", "Compute metric reports");
  add_manifest(eval);
  add_predictions(eval);
  add_bootstrap(eval);
  add_output(eval);
  add_format(eval);

  auto* boot = app.add_subcommand("bootstrap", "Reports with scene-level bootstrap intervals and ranking stability");
  add_manifest(boot);
  add_predictions(boot);
  add_bootstrap(boot);
  add_output(boot);
  add_format(boot);

  auto* plot = app.add_subcommand("plot-data", "Emit plot-ready tables");
  add_manifest(plot);
  add_predictions(plot);
  add_decode(plot);
  add_output(plot);
  plot->add_option("--kind", opt.kind, "radar | failure-composition | alpha-sweep")->required();
  plot->add_option("--sessions", opt.sessions, "Recorded session file (alpha-sweep)")->check(CLI::ExistingFile);

  auto* replay = app.add_subcommand("decode-replay", "Re-run fusion offline over recorded sessions");
  replay->add_option("--sessions", opt.sessions, "Recorded session file")->required()->check(CLI::ExistingFile);
  add_decode(replay);
  add_output(replay);

  auto* live = app.add_subcommand("decode-live", "Decode every manifest instance against a runner process");
  add_manifest(live);
  add_decode(live);
  add_output(live);
  live->add_option("--mode", opt.mode, "Contrast input")->check(CLI::IsMember({"vcd", "tcd", "c-tcd"}));
  live->add_option("--runner", opt.runner, "Runner command line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(opt);
    if (*eval) return cmd_eval(opt, false);
    if (*boot) return cmd_eval(opt, true);
    if (*plot) return cmd_plot_data(opt);
    if (*replay) return cmd_decode_replay(opt);
    if (*live) return cmd_decode_live(opt);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kUsage;
}
