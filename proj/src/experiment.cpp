#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "uslab/erm.hpp"
#include "uslab/harness.hpp"
#include "uslab/oracle.hpp"
#include "uslab/parallel.hpp"

namespace uslab {
namespace {

using nlohmann::json;

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

/// CSV field quoting for free-text columns.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

struct Job {
  std::size_t seed_size;
  std::size_t replicate;
  bool adaptive;
};

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

World build_world(const ExperimentConfig& cfg) {
  World w{{}, {}, FeatureMap(cfg.feature_kind, 1)};
  if (const auto* spec = std::get_if<GaussianMixtureSpec>(&cfg.world)) {
    const Rng root(cfg.root_seed);
    Rng train_rng = root.substream("world-train");
    Rng test_rng = root.substream("world-test");
    w.train = sample_mixture(*spec, cfg.train_count, train_rng);
    w.test = sample_mixture(*spec, cfg.test_count, test_rng);
  } else {
    const auto& csv = std::get<CsvWorld>(cfg.world);
    CsvOptions opts;
    opts.label_column = csv.label_column;
    opts.standardize = csv.standardize;
    opts.train_rows = cfg.train_count;
    CsvDataset data = ingest_csv_dataset(csv.path, opts);
    if (cfg.train_count + cfg.test_count > data.examples.size()) {
      throw std::invalid_argument("train_count + test_count exceeds the " + std::to_string(data.examples.size()) +
                                  " rows of " + csv.path.string());
    }
    w.train.assign(data.examples.begin(), data.examples.begin() + static_cast<std::ptrdiff_t>(cfg.train_count));
    w.test.assign(data.examples.begin() + static_cast<std::ptrdiff_t>(cfg.train_count),
                  data.examples.begin() + static_cast<std::ptrdiff_t>(cfg.train_count + cfg.test_count));
  }
  w.features = FeatureMap(cfg.feature_kind, static_cast<std::size_t>(w.train.front().x.size()));
  return w;
}

std::uint64_t child_seed(std::uint64_t root, std::size_t seed_size, std::size_t replicate) {
  return derive_seed(derive_seed(root, seed_size), replicate);
}

std::string RunRecord::run_id() const {
  return "s" + std::to_string(seed_size) + "_r" + std::to_string(replicate) + "_" + algorithm;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files) {
  cfg.validate();
  const World world = build_world(cfg);
  const StreamSource stream = StreamSource::finite(world.train);
  const Population train_pop = Population::uniform(world.train);
  const Population test_pop = Population::uniform(world.test);

  SamplerConfig base = cfg.sampler;
  base.features = world.features;
  base.seed_size = cfg.seed_sizes.front();

  ExperimentResult result;
  result.lambda = resolve_lambda(base, stream);
  base.lambda = result.lambda;

  TrainConfig full_cfg{result.lambda, base.gradient_tolerance, base.max_newton_steps, std::nullopt};
  ParameterVector full = ParameterVector::zeros(world.features);
  try {
    full = fit_regularized_erm(world.train, base.loss, world.features, full_cfg).params;
  } catch (const NonConvergenceError& e) {
    full = e.best().params;
  }
  result.full_data_z = zero_one_loss(full, test_pop);

  const auto curves_dir = cfg.output_dir / "curves";
  if (write_files) std::filesystem::create_directories(curves_dir);

  std::vector<Job> jobs;
  for (std::size_t s : cfg.seed_sizes) {
    for (std::size_t i = 0; i < cfg.runs_per_size; ++i) {
      jobs.push_back({s, i, true});
      jobs.push_back({s, i, false});
    }
  }

  result.runs = parallel_map<RunRecord>(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    RunRecord rec;
    rec.seed_size = job.seed_size;
    rec.replicate = job.replicate;
    rec.algorithm = job.adaptive ? "uncertainty" : "random";
    SamplerConfig sc = base;
    sc.seed_size = job.seed_size;
    sc.rng_seed = child_seed(cfg.root_seed, job.seed_size, job.replicate);
    try {
      const RunTrajectory traj = job.adaptive ? run_uncertainty_sampling(stream, sc) : run_random_sampling(stream, sc);
      rec.termination = std::string(to_string(traj.termination));
      rec.labels_used = traj.labels_used();
      if (!traj.failure_message.empty()) rec.error = traj.failure_message;
      const AsymptoticSummary summary = asymptotic_summary(traj, test_pop);
      rec.test_z = summary.final_zero_one;
      rec.train_zr = smoothed_zero_one(train_pop, sc.acceptance, traj.final_params(), sc.r).scalar();
      if (write_files) {
        std::ofstream curve(curves_dir / (rec.run_id() + ".csv"));
        curve << "t,test_z,grad_zr_norm\n";
        for (std::size_t k = 0; k < traj.thetas.size(); ++k) {
          std::string grad;
          if (sc.acceptance.theory_compliant()) {
            grad = format_double(grad_smoothed_zero_one(train_pop, sc.acceptance, traj.thetas[k], sc.r).value.norm());
          }
          curve << (sc.seed_size + k) << ',' << format_double(summary.curve[k]) << ',' << grad << '\n';
        }
      }
    } catch (const std::exception& e) {
      rec.termination = "Error";
      rec.error = e.what();
    }
    return rec;
  });

  for (std::size_t s : cfg.seed_sizes) {
    for (const char* alg : {"uncertainty", "random"}) {
      std::vector<double> zs;
      for (const auto& r : result.runs) {
        if (r.seed_size == s && r.algorithm == alg && r.test_z) zs.push_back(*r.test_z);
      }
      SizeSummary sum;
      sum.seed_size = s;
      sum.algorithm = alg;
      sum.runs = zs.size();
      if (!zs.empty()) {
        const double n = static_cast<double>(zs.size());
        double total = 0.0;
        for (double z : zs) total += z;
        sum.mean_z = total / n;
        double ss = 0.0;
        for (double z : zs) ss += (z - sum.mean_z) * (z - sum.mean_z);
        sum.var_z = zs.size() > 1 ? ss / (n - 1.0) : 0.0;
        sum.min_z = *std::min_element(zs.begin(), zs.end());
        sum.max_z = *std::max_element(zs.begin(), zs.end());
        const auto beats = std::count_if(zs.begin(), zs.end(), [&](double z) { return z < result.full_data_z; });
        sum.beats_full_data_fraction = static_cast<double>(beats) / n;
      }
      result.summaries.push_back(sum);
    }
  }

  if (write_files) {
    std::ofstream runs(cfg.output_dir / "runs.csv");
    runs << "run_id,seed_size,replicate,algorithm,termination,labels_used,asymptotic_test_z,final_train_zr,error\n";
    for (const auto& r : result.runs) {
      runs << r.run_id() << ',' << r.seed_size << ',' << r.replicate << ',' << r.algorithm << ',' << r.termination
           << ',' << r.labels_used << ',' << opt_double(r.test_z) << ',' << opt_double(r.train_zr) << ','
           << quoted(r.error) << '\n';
    }
    json sizes = json::array();
    for (const auto& s : result.summaries) {
      sizes.push_back({{"seed_size", s.seed_size},
                       {"algorithm", s.algorithm},
                       {"runs", s.runs},
                       {"mean_z", s.mean_z},
                       {"var_z", s.var_z},
                       {"min_z", s.min_z},
                       {"max_z", s.max_z},
                       {"beats_full_data_fraction", s.beats_full_data_fraction}});
    }
    json summary{{"full_data_z", result.full_data_z},
                 {"lambda", result.lambda},
                 {"root_seed", cfg.root_seed},
                 {"train_count", world.train.size()},
                 {"test_count", world.test.size()},
                 {"seed_sizes", sizes},
                 {"config", config_to_json(cfg)}};
    if (std::holds_alternative<GaussianMixtureSpec>(cfg.world)) {
      summary["world_note"] = "synthetic mixture parameters are a constructed stand-in, not measured values";
    }
    std::ofstream(cfg.output_dir / "summary.json") << summary.dump(2) << '\n';
  }
  return result;
}

}  // namespace uslab
