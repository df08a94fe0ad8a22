#include <CLI11.hpp>

#include <iostream>

#include "fbv/cli/experiment.hpp"
#include "fbv/numeric.hpp"

namespace fbv::cli {

namespace {

struct Bound {
  CLI::App* sub = nullptr;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> storage;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verification experiments for the integral-formula and mollification library", "fbv"};
  app.set_config("--config", "", "INI file; section [<experiment>] holds that experiment's keys, flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  // Values are read whole: lists and expressions are split by the experiments.
  app.get_config_formatter_base()->arrayBounds('\x01', '\x02')->arrayDelimiter('\x1f');
  app.require_subcommand(1, 1);

  // Storage must not move once options point into it.
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& spec : experiments()) {
    auto b = std::make_unique<Bound>();
    b->sub = app.add_subcommand(spec.name, spec.summary);
    b->sub->configurable();
    b->sub->allow_config_extras(CLI::config_extras_mode::error);
    std::vector<KeySpec> keys = spec.keys;
    keys.insert(keys.end(), common_keys().begin(), common_keys().end());
    for (const auto& key : keys) {
      std::string help = key.help;
      if (!key.default_value.empty()) help += " [default: " + key.default_value + "]";
      if (key.threshold) help += " (threshold)";
      auto* opt = b->sub->add_option("--" + key.name, b->storage[key.name], help);
      b->options.emplace_back(key.name, opt);
    }
    bound.push_back(std::move(b));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  const Bound* chosen = nullptr;
  for (const auto& b : bound)
    if (b->sub->parsed()) chosen = b.get();
  if (!chosen) {
    err << "fbv: no experiment selected\n";
    return 2;
  }

  std::map<std::string, std::string> overrides;
  for (const auto& [name, opt] : chosen->options)
    if (opt->count() > 0) overrides[name] = chosen->storage.at(name);

  ExperimentConfig config;
  try {
    config = resolve(chosen->sub->get_name(), overrides);
  } catch (const UsageError& e) {
    err << "fbv: " << e.what() << "\n";
    return 2;
  }

  const Report report = run_experiment(config);
  std::string path = config.values.at("out");
  const std::string& format = config.values.at("format");
  if (path.empty()) path = "fbv-" + config.experiment + (format == "json" ? ".json" : ".csv");
  try {
    if (path == "-") {
      if (format == "json")
        out << report_json(report, config, true).dump(2) << "\n";
      else
        write_rows_csv(out, report);
    } else {
      emit_report(report, config, path, format);
    }
  } catch (const Error& e) {
    err << "fbv: " << e.what() << "\n";
    return 1;
  }

  for (const auto& c : report.checks)
    err << (c.pass ? "  ok   " : "  FAIL ") << c.name << " = " << c.value << " (" << c.relation << " " << c.threshold
        << ")\n";
  if (!report.error.empty()) err << "  error: " << report.error << "\n";
  err << config.experiment << ": " << (report.pass() ? "pass" : "fail") << "\n";
  return report.pass() ? 0 : 1;
}

}  // namespace fbv::cli
