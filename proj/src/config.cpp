#include <fstream>
#include <set>

#include "uslab/harness.hpp"

namespace uslab {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
  }
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

GaussianMixtureSpec mixture_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "default") throw std::invalid_argument("world.synthetic must be \"default\" or an object");
    return GaussianMixtureSpec::default_four_cluster();
  }
  reject_unknown(j, {"components"}, "world.synthetic");
  GaussianMixtureSpec spec;
  for (const auto& c : j.at("components")) {
    reject_unknown(c, {"mean", "sigma", "weight", "label"}, "mixture component");
    spec.components.push_back({to_vector(c.at("mean").get<std::vector<double>>()), c.at("sigma").get<double>(),
                               c.at("weight").get<double>(), c.at("label").get<int>()});
  }
  spec.validate();
  return spec;
}

json mixture_to_json(const GaussianMixtureSpec& spec) {
  json comps = json::array();
  for (const auto& c : spec.components) {
    comps.push_back({{"mean", std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size())},
                     {"sigma", c.sigma},
                     {"weight", c.weight},
                     {"label", c.label}});
  }
  return {{"components", comps}};
}

std::variant<std::string, std::size_t> label_column_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  throw std::invalid_argument("label_column must be a name or a nonnegative index");
}

void sampler_from_json(const json& j, ExperimentConfig& cfg) {
  reject_unknown(j,
                 {"budget", "lambda", "epsilon", "feature_radius", "r", "acceptance", "loss", "rho", "features",
                  "max_consecutive_rejections", "max_point_repeats", "gradient_tolerance", "max_newton_steps"},
                 "sampler");
  SamplerConfig& s = cfg.sampler;
  s.budget = get_or<std::size_t>(j, "budget", s.budget);
  if (auto it = j.find("lambda"); it != j.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "auto") throw std::invalid_argument("sampler.lambda must be a number or \"auto\"");
      s.lambda.reset();
    } else {
      s.lambda = it->get<double>();
    }
  }
  s.epsilon = get_or<double>(j, "epsilon", s.epsilon);
  if (j.contains("feature_radius")) s.feature_radius = j.at("feature_radius").get<double>();
  s.r = get_or<double>(j, "r", s.r);
  if (j.contains("acceptance")) s.acceptance = AcceptanceSpec::from_name(j.at("acceptance").get<std::string>());
  const double rho = get_or<double>(j, "rho", 0.25);
  s.loss = SurrogateSpec::from_name(get_or<std::string>(j, "loss", std::string(to_string(s.loss.kind()))), rho);
  if (j.contains("features")) cfg.feature_kind = feature_kind_from_string(j.at("features").get<std::string>());
  s.max_consecutive_rejections = get_or<std::size_t>(j, "max_consecutive_rejections", s.max_consecutive_rejections);
  s.max_point_repeats = get_or<std::size_t>(j, "max_point_repeats", s.max_point_repeats);
  s.gradient_tolerance = get_or<double>(j, "gradient_tolerance", s.gradient_tolerance);
  s.max_newton_steps = get_or<int>(j, "max_newton_steps", s.max_newton_steps);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (const auto* m = std::get_if<GaussianMixtureSpec>(&world)) m->validate();
  if (train_count < 1) throw std::invalid_argument("split.train_count must be positive");
  if (test_count < 1) throw std::invalid_argument("split.test_count must be positive");
  if (seed_sizes.empty()) throw std::invalid_argument("sweep.seed_sizes must not be empty");
  for (std::size_t i = 0; i < seed_sizes.size(); ++i) {
    if (seed_sizes[i] < 1) throw std::invalid_argument("seed sizes must be positive");
    if (seed_sizes[i] >= sampler.budget) throw std::invalid_argument("each seed size must be below the budget");
    if (i > 0 && seed_sizes[i] <= seed_sizes[i - 1]) throw std::invalid_argument("seed sizes must strictly increase");
  }
  if (runs_per_size < 1) throw std::invalid_argument("sweep.runs_per_size must be positive");
  SamplerConfig probe = sampler;
  probe.seed_size = seed_sizes.front();
  probe.validate();
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j, {"world", "split", "sampler", "sweep", "output_dir", "root_seed", "threads", "verify"}, "config");
  ExperimentConfig cfg;
  if (j.contains("world")) {
    const json& w = j.at("world");
    reject_unknown(w, {"synthetic", "csv"}, "world");
    if (w.contains("synthetic") == w.contains("csv")) {
      throw std::invalid_argument("world needs exactly one of 'synthetic' or 'csv'");
    }
    if (w.contains("synthetic")) {
      cfg.world = mixture_from_json(w.at("synthetic"));
    } else {
      const json& c = w.at("csv");
      reject_unknown(c, {"path", "label_column", "standardize"}, "world.csv");
      CsvWorld csv;
      csv.path = c.at("path").get<std::string>();
      if (c.contains("label_column")) csv.label_column = label_column_from_json(c.at("label_column"));
      csv.standardize = get_or<bool>(c, "standardize", true);
      cfg.world = csv;
    }
  }
  if (j.contains("split")) {
    const json& s = j.at("split");
    reject_unknown(s, {"train_count", "test_count"}, "split");
    cfg.train_count = get_or<std::size_t>(s, "train_count", cfg.train_count);
    cfg.test_count = get_or<std::size_t>(s, "test_count", cfg.test_count);
  }
  if (j.contains("sampler")) sampler_from_json(j.at("sampler"), cfg);
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s, {"seed_sizes", "runs_per_size"}, "sweep");
    cfg.seed_sizes = get_or<std::vector<std::size_t>>(s, "seed_sizes", cfg.seed_sizes);
    cfg.runs_per_size = get_or<std::size_t>(s, "runs_per_size", cfg.runs_per_size);
  }
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir.string());
  cfg.root_seed = get_or<std::uint64_t>(j, "root_seed", cfg.root_seed);
  cfg.threads = get_or<unsigned>(j, "threads", cfg.threads);
  if (j.contains("verify")) {
    if (!j.at("verify").is_object()) throw std::invalid_argument("verify must be an object");
    cfg.verify = j.at("verify");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentConfig cfg = config_from_json(j);
  // Relative CSV paths are resolved against the config file's directory.
  if (auto* csv = std::get_if<CsvWorld>(&cfg.world); csv && csv->path.is_relative()) {
    csv->path = path.parent_path() / csv->path;
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json world;
  if (const auto* m = std::get_if<GaussianMixtureSpec>(&cfg.world)) {
    world["synthetic"] = mixture_to_json(*m);
  } else {
    const auto& c = std::get<CsvWorld>(cfg.world);
    json lc = std::holds_alternative<std::string>(c.label_column) ? json(std::get<std::string>(c.label_column))
                                                                   : json(std::get<std::size_t>(c.label_column));
    world["csv"] = {{"path", c.path.string()}, {"label_column", lc}, {"standardize", c.standardize}};
  }
  const SamplerConfig& s = cfg.sampler;
  json sampler{{"budget", s.budget},
               {"epsilon", s.epsilon},
               {"r", s.r},
               {"acceptance", to_string(s.acceptance.kind())},
               {"loss", to_string(s.loss.kind())},
               {"rho", s.loss.rho()},
               {"features", to_string(cfg.feature_kind)},
               {"max_consecutive_rejections", s.max_consecutive_rejections},
               {"max_point_repeats", s.max_point_repeats},
               {"gradient_tolerance", s.gradient_tolerance},
               {"max_newton_steps", s.max_newton_steps}};
  sampler["lambda"] = s.lambda ? json(*s.lambda) : json("auto");
  if (s.feature_radius) sampler["feature_radius"] = *s.feature_radius;
  return {{"world", world},
          {"split", {{"train_count", cfg.train_count}, {"test_count", cfg.test_count}}},
          {"sampler", sampler},
          {"sweep", {{"seed_sizes", cfg.seed_sizes}, {"runs_per_size", cfg.runs_per_size}}},
          {"output_dir", cfg.output_dir.string()},
          {"root_seed", cfg.root_seed},
          {"threads", cfg.threads},
          {"verify", cfg.verify}};
}

}  // namespace uslab
