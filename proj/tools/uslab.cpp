// uslab: experiment runner and verification front end.
//
//   uslab run --config exp.json [--root-seed N] [--threads T] [--output DIR]
//   uslab verify theorem1 descent ... [--config exp.json]
//   uslab scan-landscape [--config exp.json] [--output DIR]
//   uslab ingest-check (--csv data.csv --label-column y | --config exp.json)
//
// Thread count: --threads, else the config's "threads", else USLAB_THREADS,
// else the hardware concurrency. 0 means auto.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"
#include "uslab/harness.hpp"
#include "uslab/mixture.hpp"
#include "uslab/parallel.hpp"

using nlohmann::json;
using namespace uslab;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> root_seed;
  std::optional<unsigned> threads;
  std::string output;
};

void add_common(CLI::App* cmd, Common& c, bool with_output) {
  cmd->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--root-seed", c.root_seed, "override the config's root seed");
  cmd->add_option("--threads", c.threads, "worker threads (0 = auto)");
  if (with_output) cmd->add_option("--output", c.output, "output directory");
}

std::optional<ExperimentConfig> resolve(const Common& c) {
  std::optional<ExperimentConfig> cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  if (cfg) {
    if (c.root_seed) cfg->root_seed = *c.root_seed;
    if (!c.output.empty()) cfg->output_dir = c.output;
  }
  set_thread_count(c.threads ? *c.threads : (cfg ? cfg->threads : 0u));
  return cfg;
}

int cmd_run(const Common& c) {
  auto cfg = resolve(c);
  if (!cfg) throw CLI::ValidationError("run", "--config is required");
  const ExperimentResult res = run_experiment(*cfg);
  std::size_t errors = 0;
  for (const auto& r : res.runs) errors += r.termination == "Error";
  std::cout << "wrote " << res.runs.size() << " runs to " << cfg->output_dir.string() << " (full-data Z "
            << format_double(res.full_data_z) << ", " << errors << " errored)\n";
  for (const auto& s : res.summaries) {
    std::cout << "  seed_size " << s.seed_size << " " << s.algorithm << ": mean_z " << format_double(s.mean_z)
              << " var_z " << format_double(s.var_z) << " beats_full " << format_double(s.beats_full_data_fraction)
              << '\n';
  }
  return 0;
}

int cmd_verify(const Common& c, const std::vector<std::string>& checks) {
  if (checks.empty()) throw CLI::ValidationError("verify", "name at least one check, or 'all'");
  const auto cfg = resolve(c);
  const auto reports = run_verify_checks(checks, cfg, std::cout, c.root_seed);
  bool ok = true;
  for (const auto& r : reports) ok = ok && (r.skipped || r.pass);
  return ok ? 0 : 1;
}

int cmd_scan(const Common& c) {
  auto cfg = resolve(c);
  const ExperimentConfig eff = cfg ? *cfg : ExperimentConfig{};
  if (!std::holds_alternative<GaussianMixtureSpec>(eff.world)) {
    throw CLI::ValidationError("scan-landscape", "needs a synthetic world");
  }
  const World world = build_world(eff);
  const Population pop = Population::uniform(world.train);
  const auto basins = landscape_scan(pop);
  json out = json::array();
  for (const auto& b : basins) {
    out.push_back({{"z", b.z},
                   {"grid_z", b.grid_z},
                   {"angle", b.angle},
                   {"offset", b.offset},
                   {"theta", {b.params.theta[0], b.params.theta[1], b.params.theta[2]}},
                   {"plateau_cells", b.plateau_cells}});
  }
  const json doc{{"snapshot_size", world.train.size()}, {"root_seed", eff.root_seed}, {"basins", out}};
  if (!c.output.empty()) {
    std::filesystem::create_directories(c.output);
    std::ofstream(std::filesystem::path(c.output) / "basins.json") << doc.dump(2) << '\n';
  }
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int cmd_ingest(const Common& c, const std::string& csv, const std::string& label, bool no_std,
               std::optional<std::size_t> train_rows) {
  auto cfg = resolve(c);
  CsvOptions opts;
  std::filesystem::path path;
  if (!csv.empty()) {
    path = csv;
    if (!label.empty()) {
      const bool numeric = label.find_first_not_of("0123456789") == std::string::npos;
      opts.label_column = numeric ? std::variant<std::string, std::size_t>(std::stoul(label)) : label;
    }
    opts.standardize = !no_std;
    opts.train_rows = train_rows;
  } else if (cfg && std::holds_alternative<CsvWorld>(cfg->world)) {
    const auto& w = std::get<CsvWorld>(cfg->world);
    path = w.path;
    opts.label_column = w.label_column;
    opts.standardize = w.standardize && !no_std;
    opts.train_rows = cfg->train_count;
  } else {
    throw CLI::ValidationError("ingest-check", "give --csv or a config with a csv world");
  }
  const CsvDataset data = ingest_csv_dataset(path, opts);
  std::map<int, std::size_t> counts;
  for (const auto& z : data.examples) ++counts[z.y];
  json doc{{"rows", data.examples.size()},
           {"features", data.feature_names},
           {"label_counts", {{"-1", counts[-1]}, {"+1", counts[1]}}},
           {"standardized", opts.standardize}};
  if (opts.standardize) {
    doc["means"] = data.means;
    doc["scales"] = data.scales;
  }
  std::cout << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming uncertainty sampling laboratory"};
  app.require_subcommand(1);

  Common run_opts, verify_opts, scan_opts, ingest_opts;
  auto* run = app.add_subcommand("run", "paired uncertainty/random sampling sweep");
  add_common(run, run_opts, true);

  auto* verify = app.add_subcommand("verify", "run verification checks, one JSON line each");
  add_common(verify, verify_opts, false);
  std::vector<std::string> checks;
  std::string names;
  for (const auto& n : verify_check_names()) names += " " + n;
  verify->add_option("checks", checks, "checks to run:" + names + " all");

  auto* scan = app.add_subcommand("scan-landscape", "brute-force zero-one loss basins of the synthetic world");
  add_common(scan, scan_opts, true);

  auto* ingest = app.add_subcommand("ingest-check", "parse a CSV dataset and report its shape");
  add_common(ingest, ingest_opts, false);
  std::string csv, label;
  bool no_std = false;
  std::optional<std::size_t> train_rows;
  ingest->add_option("--csv", csv, "CSV file")->check(CLI::ExistingFile);
  ingest->add_option("--label-column", label, "label column name or 0-based index");
  ingest->add_flag("--no-standardize", no_std, "keep raw feature values");
  ingest->add_option("--train-rows", train_rows, "rows used to fit the standardizer");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (verify->parsed()) return cmd_verify(verify_opts, checks);
    if (scan->parsed()) return cmd_scan(scan_opts);
    if (ingest->parsed()) return cmd_ingest(ingest_opts, csv, label, no_std, train_rows);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
