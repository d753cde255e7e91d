// apfpred: run potential-field episodes, compare local-minimum predictors, export plot data.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apfpred/errors.hpp"
#include "apfpred/harness.hpp"
#include "apfpred/world.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;

apfpred::ScenarioConfig resolve_scenario(const std::string& name_or_path) {
  if (auto builtin = apfpred::builtin_scenario(name_or_path)) return *builtin;
  if (!std::filesystem::exists(name_or_path)) {
    throw apfpred::ConfigError("unknown scenario '" + name_or_path + "' (not a built-in name or an existing file)");
  }
  return apfpred::load_scenario_file(name_or_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potential-field navigation with local-minimum prediction"};
  app.require_subcommand(1);

  std::string scenario;
  std::string predictor = "bayes";
  std::optional<double> gamma;
  std::string out;
  std::string format = "csv";
  auto* run = app.add_subcommand("run", "Run one episode and write its trace");
  run->add_option("--scenario", scenario, "Built-in name (wall, hallway) or scenario JSON path")->required();
  run->add_option("--predictor", predictor, "none | bayes | method1 | method2")
      ->check(CLI::IsMember({"none", "bayes", "method1", "method2"}));
  run->add_option("--gamma", gamma, "Halting confidence threshold in (0, 1]");
  run->add_option("--out", out, "Trace output path")->required();
  run->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::string> scenarios;
  std::string compare_out;
  auto* cmp = app.add_subcommand("compare", "Tabulate first-signal steps for every predictor");
  cmp->add_option("--scenarios", scenarios, "Scenario JSON paths, or 'builtin'")->required();
  cmp->add_option("--out", compare_out, "Comparison CSV path")->required();

  std::string trace_path;
  std::string out_dir;
  auto* plot = app.add_subcommand("plotdata", "Derive belief and trajectory CSVs from a trace");
  plot->add_option("--trace", trace_path, "Trace file (CSV or JSON)")->required();
  plot->add_option("--out-dir", out_dir, "Output directory")->required();

  std::string export_dir;
  auto* exp = app.add_subcommand("export", "Write the built-in scenarios as map + JSON documents");
  exp->add_option("--out-dir", export_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) {
      apfpred::ScenarioConfig cfg = resolve_scenario(scenario);
      if (gamma) cfg.gamma = *gamma;
      const auto kind = *apfpred::parse_predictor(predictor);
      const apfpred::SimTrace trace = apfpred::run_episode(cfg, kind);
      apfpred::emit_trace(trace, format == "json" ? apfpred::TraceFormat::json : apfpred::TraceFormat::csv, out);
      std::cout << trace.scenario << " predictor=" << predictor << " outcome=" << apfpred::to_string(trace.outcome)
                << " final_step=" << trace.final_step << " final_belief=" << trace.final_belief << "\n";
    } else if (*cmp) {
      std::vector<apfpred::ScenarioConfig> configs;
      for (const auto& s : scenarios) {
        if (s == "builtin") {
          for (auto& c : apfpred::builtin_scenarios()) configs.push_back(std::move(c));
        } else {
          configs.push_back(resolve_scenario(s));
        }
      }
      const std::string table = apfpred::format_comparison_csv(apfpred::compare(configs));
      std::ofstream f(compare_out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write '" + compare_out + "'");
      f << table;
      std::cout << table;
    } else if (*plot) {
      apfpred::emit_plot_data(apfpred::load_trace_file(trace_path), out_dir);
    } else if (*exp) {
      for (const auto& c : apfpred::builtin_scenarios()) {
        std::cout << apfpred::save_scenario(c, export_dir).string() << "\n";
      }
    }
  } catch (const apfpred::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const apfpred::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const apfpred::CollisionError& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    return kExitAbort;
  } catch (const apfpred::SingularityError& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    return kExitAbort;
  } catch (const apfpred::SensorError& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    return kExitAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
