#include "ctmle/store.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ctmle {

namespace {

using nlohmann::json;

std::string bool01(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

CsvFile::CsvFile(std::string schema, std::string hash,
                 std::vector<std::string> columns)
    : schema_(std::move(schema)),
      hash_(std::move(hash)),
      columns_(std::move(columns)) {}

void CsvFile::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw std::runtime_error("CsvFile: row width mismatch for " + schema_);
  rows_.push_back(cells);
}

std::string CsvFile::str() const {
  std::ostringstream out;
  out << "# schema=" << schema_ << "\n";
  out << "# config_hash=" << hash_ << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i)
    out << (i ? "," : "") << columns_[i];
  out << "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

void CsvFile::write(const std::string& path) const {
  write_text_file(path, str());
}

void write_run_artifacts(const std::string& out_dir, const RunOutput& out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" + out_dir +
                             "': " + ec.message());
  const std::string hash = config_hash(out.config);
  const fs::path dir(out_dir);

  save_run_config(out.config, (dir / "config.json").string());

  {
    CsvFile csv("ctmle.episodes.v1", hash,
                {"episode", "policy_index", "policy_id", "model_index",
                 "model_id", "optimistic_value", "realized_return", "m_gaps",
                 "measurement_count", "delta_bar_sq", "cset_size",
                 "cset_hat_size", "intersection_empty", "true_in_cset",
                 "true_in_cset_hat"});
    for (const EpisodeRecord& r : out.result.records) {
      const auto pid = static_cast<std::size_t>(r.policy_index);
      const auto mid = static_cast<std::size_t>(r.model_index);
      csv.add_row({std::to_string(r.episode), std::to_string(r.policy_index),
                   pid < out.policy_ids.size() ? out.policy_ids[pid] : "?",
                   std::to_string(r.model_index),
                   mid < out.model_ids.size() ? out.model_ids[mid] : "?",
                   format_g17(r.optimistic_value),
                   format_g17(r.realized_return), std::to_string(r.m_gaps),
                   std::to_string(r.measurement_count),
                   format_g17(r.delta_bar_sq), std::to_string(r.cset_size),
                   std::to_string(r.cset_hat_size),
                   bool01(r.intersection_empty), bool01(r.true_in_cset),
                   bool01(r.true_in_cset_hat)});
    }
    csv.write((dir / "episodes.csv").string());
  }

  {
    CsvFile csv("ctmle.regret.v1", hash,
                {"episode", "instantaneous", "cumulative", "bound_rhs"});
    for (std::size_t i = 0; i < out.regret.instantaneous.size(); ++i) {
      const bool have_bound = i < out.bound_curve.size();
      csv.add_row({std::to_string(i + 1),
                   format_g17(out.regret.instantaneous[i]),
                   format_g17(out.regret.cumulative[i]),
                   have_bound ? format_g17(out.bound_curve[i]) : "nan"});
    }
    csv.write((dir / "regret.csv").string());
  }

  {
    json s;
    s["schema_version"] = 1;
    s["config_hash"] = hash;
    s["preset"] = out.preset_name;
    s["episodes"] = static_cast<int>(out.result.records.size());
    s["beta"] = out.result.beta;
    s["m_bar_total"] = out.result.m_bar_total;
    s["hat_policy_index"] = out.result.hat_policy_index;
    s["hat_policy_id"] =
        out.result.hat_policy_index >= 0 &&
                static_cast<std::size_t>(out.result.hat_policy_index) <
                    out.policy_ids.size()
            ? out.policy_ids[static_cast<std::size_t>(
                  out.result.hat_policy_index)]
            : "?";
    s["hat_episode"] = out.result.hat_episode;
    s["oracle_best_policy"] = out.regret.oracle.best_policy;
    s["oracle_best_value"] = out.regret.oracle.best_value;
    s["oracle_values"] = out.regret.oracle.values;
    s["policy_variances"] = out.policy_variances;
    s["cumulative_regret"] = out.regret.cumulative.empty()
                                 ? 0.0
                                 : out.regret.cumulative.back();
    s["bound_rhs"] = out.bound_rhs_final;
    s["bound_holds"] = out.regret.cumulative.empty() ||
                       out.regret.cumulative.back() <= out.bound_rhs_final;
    s["sum_delta_bar_sq"] = out.sum_delta_bar_sq;
    s["m_total"] = out.m_total;
    s["lambda_complexity_0"] = out.lambda_complexity_0;
    s["lambda_complexity_half"] = out.lambda_complexity_half;
    s["lambda_complexity_1"] = out.lambda_complexity_1;
    s["best_policy_variance"] = out.best_policy_variance.variance;
    s["best_policy_variance_std_err"] = out.best_policy_variance.std_err;
    s["gronwall_bound"] = out.gronwall_bound;
    int in_cset = 0, in_hat = 0, empty_inter = 0;
    for (const EpisodeRecord& r : out.result.records) {
      in_cset += r.true_in_cset ? 1 : 0;
      in_hat += r.true_in_cset_hat ? 1 : 0;
      empty_inter += r.intersection_empty ? 1 : 0;
    }
    const double n = std::max<std::size_t>(1, out.result.records.size());
    s["coverage_cset"] = in_cset / n;
    s["coverage_cset_hat"] = in_hat / n;
    s["intersection_empty_count"] = empty_inter;
    s["wall_seconds"] = out.wall_seconds;
    write_text_file((dir / "summary.json").string(), s.dump(2) + "\n");
  }

  {
    json s;
    s["schema_version"] = 1;
    s["config_hash"] = hash;
    s["seed"] = out.config.learner.seed;
    s["derivation"] =
        "stream(seed, episode, purpose, replicate) keyed by iterated "
        "splitmix64; replicate substreams re-key the same tuple";
    json purposes;
    purposes["env_rollout"] = 1;
    purposes["schedule_offsets"] = 2;
    purposes["value_scan"] = 3;
    purposes["oracle"] = 4;
    purposes["marginal"] = 5;
    purposes["decomposition"] = 6;
    purposes["diagnostics"] = 7;
    purposes["episode_draw"] = 8;
    purposes["fixture"] = 9;
    s["purpose_streams"] = purposes;
    write_text_file((dir / "seeds.json").string(), s.dump(2) + "\n");
  }
}

}  // namespace ctmle
