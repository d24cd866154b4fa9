// specgate: governing-sequence and semigroup stability certificates.
//
//   specgate govern <plan.json>
//   specgate certify <plan.json>
//   specgate semigroup <plan.json>
//   specgate fuzz <plan.json> --cases K --seed S --workers W

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "specgate/error.hpp"
#include "specgate/plan.hpp"
#include "specgate/run.hpp"

namespace fs = std::filesystem;
using namespace specgate;

namespace {

bool write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Governing-sequence and semigroup stability certificates"};
  app.set_version_flag("--version", std::string(run::kVersion));
  app.require_subcommand(1);

  std::string plan_path;
  std::string csv_dir;
  bool quiet = false;
  std::optional<std::size_t> cases, marginal, workers;
  std::optional<unsigned long long> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("plan", plan_path, "analysis plan (JSON)")->required();
    sub->add_option("--csv", csv_dir, "directory for CSV curve files");
    sub->add_flag("--quiet", quiet, "suppress the human-readable summary");
  };
  auto* govern = app.add_subcommand("govern", "check governing sequences of weak orbits");
  auto* certify = app.add_subcommand("certify", "govern plus resolvent probes near the unit circle");
  auto* semigroup = app.add_subcommand("semigroup", "strip certificate for a matrix semigroup");
  auto* fuzz = app.add_subcommand("fuzz", "random stable and marginal operators");
  for (auto* sub : {govern, certify, semigroup, fuzz}) add_common(sub);
  fuzz->add_option("--cases", cases, "number of stable cases");
  fuzz->add_option("--marginal", marginal, "number of marginal cases");
  fuzz->add_option("--seed", seed, "fuzz seed");
  fuzz->add_option("--workers", workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  run::RunOptions options;
  if (govern->parsed()) options.command = run::Command::Govern;
  if (certify->parsed()) options.command = run::Command::Certify;
  if (semigroup->parsed()) options.command = run::Command::Semigroup;
  if (fuzz->parsed()) options.command = run::Command::Fuzz;
  options.cases = cases;
  options.marginal = marginal;
  options.workers = workers;
  options.seed = seed;

  std::ifstream in(plan_path, std::ios::binary);
  if (!in) {
    std::cerr << "specgate: cannot read " << plan_path << "\n";
    return 1;
  }
  std::stringstream text;
  text << in.rdbuf();

  plan::AnalysisPlan p;
  try {
    p = plan::parse_plan(text.str());
  } catch (const Error& e) {
    std::cerr << "specgate: " << plan_path << ": " << e.what() << "\n";
    return 1;
  }
  if (!csv_dir.empty()) p.output.csv_dir = csv_dir;

  const auto result = run::run(p, options);
  if (!quiet || result.exit_code == 1) std::cerr << result.summary;
  if (result.report.is_null()) return result.exit_code;

  const std::string report = result.report.dump(2) + "\n";
  if (p.output.report) {
    if (!write_file(*p.output.report, report)) {
      std::cerr << "specgate: cannot write " << *p.output.report << "\n";
      return 1;
    }
  } else {
    std::cout << report;
  }

  const auto dir = p.output.csv_dir;
  if (dir) {
    std::error_code ec;
    fs::create_directories(*dir, ec);
    for (const auto& [name, contents] : result.csv) {
      if (!write_file(fs::path(*dir) / name, contents)) {
        std::cerr << "specgate: cannot write " << (fs::path(*dir) / name).string() << "\n";
        return 1;
      }
    }
  }
  if (!result.reproducers.empty()) {
    const fs::path where = dir ? fs::path(*dir)
                           : p.output.report ? fs::path(*p.output.report).parent_path()
                                             : fs::path(".");
    for (const auto& [name, plan_json] : result.reproducers) {
      const auto path = (where.empty() ? fs::path(".") : where) / name;
      write_file(path, plan_json.dump(2) + "\n");
      if (!quiet) std::cerr << "reproducer written to " << path.string() << "\n";
    }
  }
  return result.exit_code;
}
