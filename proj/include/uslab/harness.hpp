#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "uslab/mixture.hpp"
#include "uslab/model.hpp"
#include "uslab/sampler.hpp"
#include "uslab/verify.hpp"

namespace uslab {

// ---------------------------------------------------------------- ingestion

/// Ingestion failure with a location. row is the 1-based data row (the
/// header is row 0) and column the header name; either may be empty.
class CsvError : public std::runtime_error {
 public:
  enum class Kind { io, malformed, missing_column, non_numeric, bad_label, too_few_labels };
  CsvError(Kind kind, std::string message, std::optional<std::size_t> row = std::nullopt, std::string column = {});
  Kind kind() const { return kind_; }
  std::optional<std::size_t> row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  Kind kind_;
  std::optional<std::size_t> row_;
  std::string column_;
};

struct CsvOptions {
  /// Header name, or a 0-based column index.
  std::variant<std::string, std::size_t> label_column = std::string("label");
  bool standardize = true;
  /// Rows used to fit the standardizer (the training split); nullopt means all rows.
  std::optional<std::size_t> train_rows;
};

struct CsvDataset {
  std::vector<Example> examples;  ///< file order
  std::vector<std::string> feature_names;
  std::vector<double> means;  ///< empty when standardization is off
  std::vector<double> scales;
};

/// Reads a headered numeric CSV. Labels in {-1, +1} or {0, 1}; 0 maps to -1.
CsvDataset ingest_csv_dataset(const std::filesystem::path& path, const CsvOptions& options = {});
CsvDataset ingest_csv_text(std::string_view text, const CsvOptions& options = {});

// ------------------------------------------------------------------ config

struct CsvWorld {
  std::filesystem::path path;
  std::variant<std::string, std::size_t> label_column = std::string("label");
  bool standardize = true;
};

struct ExperimentConfig {
  std::variant<GaussianMixtureSpec, CsvWorld> world = GaussianMixtureSpec::default_four_cluster();
  std::size_t train_count = 2000;
  std::size_t test_count = 5000;
  /// Sampler settings; `features` is rebuilt from feature_kind and the data
  /// dimension. Experiments train on the logistic loss by default.
  SamplerConfig sampler = [] {
    SamplerConfig s;
    s.loss = SurrogateSpec::logistic();
    return s;
  }();
  FeatureKind feature_kind = FeatureKind::identity_with_bias;
  std::vector<std::size_t> seed_sizes{2};
  std::size_t runs_per_size = 10;
  std::filesystem::path output_dir = "out";
  std::uint64_t root_seed = 0;
  unsigned threads = 0;
  /// Raw "verify" block; read by the verify driver.
  nlohmann::json verify = nlohmann::json::object();

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Materialized train/test split. Synthetic worlds draw train and test from
/// independent substreams of root_seed.
struct World {
  std::vector<Example> train;
  std::vector<Example> test;
  FeatureMap features;
};

World build_world(const ExperimentConfig& cfg);

// -------------------------------------------------------------- experiment

/// Child seed of replicate i at seed size s.
std::uint64_t child_seed(std::uint64_t root, std::size_t seed_size, std::size_t replicate);

struct RunRecord {
  std::size_t seed_size = 0;
  std::size_t replicate = 0;
  std::string algorithm;  ///< "uncertainty" or "random"
  std::string termination;
  std::size_t labels_used = 0;
  std::optional<double> test_z;    ///< empty if the run raised
  std::optional<double> train_zr;  ///< empty if the run raised or Z_r is undefined
  std::string error;
  std::string run_id() const;
};

struct SizeSummary {
  std::size_t seed_size = 0;
  std::string algorithm;
  std::size_t runs = 0;
  double mean_z = 0.0;
  double var_z = 0.0;  ///< sample variance (n - 1 denominator); 0 for a single run
  double min_z = 0.0;
  double max_z = 0.0;
  double beats_full_data_fraction = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<SizeSummary> summaries;
  double full_data_z = 0.0;
  double lambda = 0.0;
};

/// Paired uncertainty / random sampling sweep over seed sizes and
/// replicates. Writes runs.csv, curves/<run id>.csv and summary.json under
/// output_dir when write_files is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// ------------------------------------------------------------------ verify

/// Check names accepted by run_verify_checks.
const std::vector<std::string>& verify_check_names();

/// Runs the named checks ("all" expands to every check) and writes one JSON
/// line per report. Without a config the P4 fixture and built-in settings
/// are used. `seed` overrides the check seed (default: verify.seed, else
/// root_seed). Throws std::invalid_argument on an unknown name.
std::vector<VerificationReport> run_verify_checks(const std::vector<std::string>& names,
                                                  const std::optional<ExperimentConfig>& cfg, std::ostream& out,
                                                  std::optional<std::uint64_t> seed = std::nullopt);

// ---------------------------------------------------------------- fixtures

/// The four-point population {(-2,-1), (-0.5,-1), (0.5,+1), (2,+1)}, uniform weights.
Population p4_population();

/// `count` points uniform in the unit disk, labeled +1 with probability
/// sigmoid(3 x0 - 2 x1 + 0.5); uniform weights.
Population disk_population(std::size_t count, std::uint64_t seed);

/// theta = (1.5, -1, 0.2) with identity-with-bias features, used with disk_population.
ParameterVector disk_probe_params();

/// 1-D mixture: +1 ~ N(1, 1), -1 ~ N(-1, 1), equal weights.
GaussianMixtureSpec two_gaussian_line();

/// Defaults used by `verify` when no config is given: the default world with
/// the mollified hinge, triangle q and r = 0.5.
ExperimentConfig verify_default_config();

}  // namespace uslab
