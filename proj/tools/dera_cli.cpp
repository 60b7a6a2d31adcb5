// Scenario-driven front end: dera_cli <command> --scenario FILE [--out DIR] [--force] [--threads N]
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "dera/errors.hpp"
#include "dera/runner.hpp"
#include "dera/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DER aggregation market simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  bool force = false;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (default: the scenario's output_dir)");
  app.add_flag("--force", force, "Overwrite an existing output directory");
  app.add_option("--threads", threads, "Worker threads for grid sweeps")->check(CLI::PositiveNumber);

  const std::pair<const char*, const char*> commands[] = {
      {"run", "Every section present in the scenario"},
      {"cases", "Welfare ledger over the gamma x g grid"},
      {"bidcurve", "Aggregate DERA bid curve"},
      {"clear", "Direct vs aggregated market clearing"},
      {"sfe", "Supply function equilibrium and competitive benchmark"},
      {"nashcheck", "Unilateral deviation scan of the SFE solution"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::ifstream in(scenario_path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    const dera::Scenario s = dera::parse_scenario_text(text.str(), scenario_path);

    dera::Artifacts files;
    if (command == "run") files = dera::run_artifacts(s, threads);
    else if (command == "cases") files = dera::cases_artifacts(s, threads);
    else if (command == "bidcurve") files = dera::bidcurve_artifacts(s);
    else if (command == "clear") files = dera::clearing_artifacts(s);
    else if (command == "sfe") files = dera::sfe_artifacts(s);
    else files = dera::nashcheck_artifacts(s);

    files["manifest.json"] = dera::manifest_json(s, command, text.str(), files);
    const std::string dir = out_dir.empty() ? s.output_dir : out_dir;
    dera::write_artifacts(dir, files, force);
    for (const auto& [name, content] : files) std::cout << dir << "/" << name << "\n";
    return 0;
  } catch (const dera::ScenarioError& e) {
    std::cerr << "error: scenario: " << e.what() << "\n";
    return 2;
  } catch (const dera::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << command << ": " << e.what() << "\n";
    return 1;
  }
}
