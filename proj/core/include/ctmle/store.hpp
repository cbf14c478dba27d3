#pragma once

#include <string>
#include <vector>

#include "ctmle/config.hpp"
#include "ctmle/metrics.hpp"

namespace ctmle {

// shortest round-trippable decimal form (17 significant digits)
std::string format_g17(double v);

// writes UTF-8 text with \n endings; throws std::runtime_error on failure
void write_text_file(const std::string& path, const std::string& content);

// everything one `run` invocation produces; write_run_artifacts lays it out
// as config.json, episodes.csv, regret.csv, summary.json, seeds.json
struct RunOutput {
  RunConfig config;
  std::string preset_name;
  ExperimentResult result;
  RegretCurve regret;
  std::vector<double> bound_curve;       // per-episode regret bound, may be empty
  std::vector<double> policy_variances;  // true-model total variance per policy
  VarianceEstimate best_policy_variance;
  double gronwall_bound = 0.0;
  double bound_rhs_final = 0.0;
  double sum_delta_bar_sq = 0.0;  // sum over episodes of mean squared gap
  long m_total = 0;               // measurements actually taken
  double lambda_complexity_0 = 0.0;    // episode-count cost
  double lambda_complexity_half = 0.0;
  double lambda_complexity_1 = 0.0;    // measurement-count cost
  double wall_seconds = 0.0;
  std::vector<std::string> policy_ids;
  std::vector<std::string> model_ids;
};

void write_run_artifacts(const std::string& out_dir, const RunOutput& out);

// CSV with two leading comment lines (# schema=..., # config_hash=...), a
// header row, \n endings, and %.17g floats
class CsvFile {
 public:
  CsvFile(std::string schema, std::string hash,
          std::vector<std::string> columns);

  void add_row(const std::vector<std::string>& cells);
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::string schema_;
  std::string hash_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace ctmle
