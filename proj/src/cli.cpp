#include "aqcast/cli.hpp"

#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "aqcast/config.hpp"
#include "aqcast/errors.hpp"
#include "aqcast/log.hpp"
#include "aqcast/pipeline.hpp"

namespace aqcast {

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool verbose = false;
  bool json_errors = false;
};

void report_error(std::ostream& err, bool as_json, const std::string& kind, ErrorClass cls,
                  const std::string& message) {
  if (as_json) {
    nlohmann::json doc{{"error", kind},
                       {"class", cls == ErrorClass::config ? "config" : "data"},
                       {"exit_code", static_cast<int>(cls)},
                       {"message", message}};
    err << doc.dump() << '\n';
  } else {
    err << "error (" << kind << "): " << message << '\n';
  }
}

RunConfig resolve_config(const Options& opt) {
  RunConfig cfg = load_config(opt.config);
  if (opt.seed) cfg.set_seed(*opt.seed);
  if (opt.out) {
    cfg.output_dir = *opt.out;
  }
  return cfg;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out) {
  if (name == "validate") {
    const auto report = cmd_validate(cfg);
    for (const auto& v : report.violations) {
      out << v.source << ',' << v.station_id << ',' << (v.date ? v.date->to_string() : "") << ',' << v.message
          << '\n';
    }
    out << (report.ok() ? "ok" : std::to_string(report.violations.size()) + " violations") << '\n';
    return report.ok() ? 0 : 1;
  }
  if (name == "report") {
    out << cmd_report(cfg).string() << '\n';
    return 0;
  }
  if (name == "train") {
    for (const auto& p : cmd_train(cfg)) out << p.string() << '\n';
    return 0;
  }
  if (name == "evaluate") {
    const auto rows = cmd_evaluate(cfg);
    out << results_table(rows, cfg.pollutants, cfg.models, cfg.windows).text;
    return 0;
  }
  if (name == "predict") {
    const auto preds = cmd_predict(cfg);
    out << preds.size() << " predictions written to " << (cfg.output_dir / "predictions.csv").string() << '\n';
    return 0;
  }
  if (name == "predict-grid") {
    const auto cells = cmd_predict_grid(cfg);
    out << cells.size() << " cells written to " << (cfg.output_dir / "grid_predictions.csv").string() << '\n';
    return 0;
  }
  throw ConfigError("unknown subcommand " + name);
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Next-day air-quality forecasting from satellite, weather and terrain data", "aqcast"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--config", opt.config, "JSON run configuration")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Seed for stochastic learners");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_flag("--verbose", opt.verbose, "Log progress to stderr");
  app.add_flag("--json-errors", opt.json_errors, "Print errors as one JSON object");
  for (const char* name : {"validate", "report", "train", "evaluate", "predict", "predict-grid"}) {
    app.add_subcommand(name);
  }
  // Options are global: accept them after the subcommand too.
  app.fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, std::find(args.begin(), args.end(), "--json-errors") != args.end(), "UsageError",
                 ErrorClass::config, e.what());
    return static_cast<int>(ErrorClass::config);
  }
  if (*seed_opt) opt.seed = seed;
  if (*out_opt) opt.out = out_dir;

  log::set_verbose(opt.verbose);
  auto previous = log::set_sink([&err, verbose = opt.verbose](log::Level level, const std::string& msg) {
    if (level == log::Level::warning) err << "warning: " << msg << '\n';
    else if (verbose) err << msg << '\n';
  });
  struct Restore {
    log::Sink sink;
    ~Restore() { log::set_sink(std::move(sink)); }
  } restore{std::move(previous)};

  try {
    const auto cfg = resolve_config(opt);
    return run_command(app.get_subcommands().front()->get_name(), cfg, out);
  } catch (const Error& e) {
    report_error(err, opt.json_errors, e.kind(), e.error_class(), e.what());
    return static_cast<int>(e.error_class());
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, opt.json_errors, "IoError", ErrorClass::data, e.what());
    return static_cast<int>(ErrorClass::data);
  }
}

} // namespace aqcast
