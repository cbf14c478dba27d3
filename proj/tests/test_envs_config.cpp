#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctmle/config.hpp"
#include "ctmle/envs.hpp"
#include "ctmle/errors.hpp"
#include "ctmle/metrics.hpp"
#include "ctmle/store.hpp"
#include "ctmle/sweep.hpp"

using namespace ctmle;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double class_diffusion(const SdeModel& m) {
  return m.diffusion(Vec::Zero(1), Vec::Zero(1))(0, 0);
}

Policy zero_gain() {
  Policy p;
  p.id = "zero";
  p.act = [](const Vec&) { return Vec::Zero(1).eval(); };
  p.act1 = [](double) { return 0.0; };
  return p;
}

}  // namespace

TEST_CASE("the controlled OU preset crosses five drifts with five noises") {
  const Preset p = make_ou_control(0.5);
  CHECK(p.name == "ou_control");
  CHECK(p.env.model_class.n_drift == 5);
  CHECK(p.env.model_class.n_diffusion == 5);
  CHECK(p.env.model_class.models.size() == 25);
  const int t = p.env.model_class.true_index;
  REQUIRE(t >= 0);
  const SdeModel& truth = p.env.model_class.models[static_cast<std::size_t>(t)];
  CHECK(truth.drift1(0.8, 0.1) ==
        doctest::Approx(-0.25 * 0.8 + 0.1).epsilon(1e-15));
  CHECK(class_diffusion(truth) == 0.5);
  CHECK(p.env.policies.size() == 5);
  for (const Policy& pol : p.env.policies) CHECK(pol.affine.has_value());
  CHECK(p.env.horizon == 1.0);
  CHECK(p.env.x_ini.size() == 1);
  CHECK(p.g_frob == 0.5);
  CHECK(p.l_f > 0.0);
  CHECK(p.l_b > 0.0);
}

TEST_CASE("zero noise leaves the truth outside a floored class") {
  const Preset p = make_ou_control(0.0);
  CHECK(p.env.model_class.true_index == -1);
  CHECK(p.env.model_class.n_diffusion == 1);
  CHECK(p.env.model_class.models.size() == 5);
  CHECK(class_diffusion(p.env.true_model) == 0.0);
  for (const SdeModel& m : p.env.model_class.models)
    CHECK(class_diffusion(m) == kDiffusionFloor);
}

TEST_CASE("tiny noise levels are floored and deduplicated") {
  const Preset p = make_ou_control(0.01);
  CHECK(p.env.model_class.n_diffusion == 1);
  CHECK(p.env.model_class.true_index == -1);
  for (const SdeModel& m : p.env.model_class.models)
    CHECK(class_diffusion(m) >= kDiffusionFloor);
  CHECK_THROWS_AS(make_ou_control(-0.1), std::invalid_argument);
}

TEST_CASE("the planar preset exposes the matrix-exponential path") {
  const Preset p = make_linear_2d();
  CHECK(p.env.model_class.models.size() == 4);
  CHECK(p.env.model_class.true_index == 0);
  CHECK(p.env.model_class.kernel_mode == KernelMode::closed_form_linear);
  CHECK(p.env.true_model.state_dim == 2);
  CHECK(p.env.x_ini.size() == 2);
  CHECK(p.env.policies.size() == 2);
}

TEST_CASE("the saturating preset goes through the Euler kernel") {
  const Preset p = make_bounded_nonlinear();
  CHECK(p.env.model_class.models.size() == 9);
  CHECK(p.env.model_class.true_index == 4);
  CHECK(p.env.model_class.kernel_mode == KernelMode::euler_gaussian);
  CHECK(p.env.true_model.kind == ModelKind::nonlinear);
  CHECK(p.env.policies.size() == 3);
}

TEST_CASE("preset dispatch knows exactly three names") {
  CHECK(preset_names().size() == 3);
  for (const std::string& name : preset_names())
    CHECK(make_preset(name).name == name);
  CHECK_THROWS_AS(make_preset("nope"), std::invalid_argument);
}

TEST_CASE("noise level separates reward variance under a passive control") {
  const Preset hi = make_ou_control(2.0);
  const Preset lo = make_ou_control(0.4);
  const Policy passive = zero_gain();
  const VarianceEstimate vh =
      total_variance(hi.env.true_model, passive, hi.env.reward, hi.env.x_ini,
                     4000, 1e-3, RngStream(41, 0, Purpose::diagnostics));
  const VarianceEstimate vl =
      total_variance(lo.env.true_model, passive, lo.env.reward, lo.env.x_ini,
                     4000, 1e-3, RngStream(41, 1, Purpose::diagnostics));
  CHECK(vh.variance > vl.variance + 3.0 * (vh.std_err + vl.std_err));
}

TEST_CASE("configs round-trip through their canonical form") {
  const std::string text = R"({
    "schema_version": 1,
    "preset": "ou_control",
    "sigma": 0.75,
    "episodes": 12,
    "delta": 0.05,
    "beta_doubled": true,
    "randomize": false,
    "value_rollouts": 32,
    "schedule": {"kind": "geometric", "m": 3, "ratio": 0.5},
    "env_step_scale": 0.002,
    "value_step_divisor": 128,
    "seed": 99
  })";
  const RunConfig cfg = parse_run_config(text);
  CHECK(cfg.preset == "ou_control");
  REQUIRE(cfg.sigma.has_value());
  CHECK(*cfg.sigma == 0.75);
  CHECK(cfg.learner.episodes == 12);
  CHECK(cfg.learner.beta_doubled);
  CHECK(!cfg.learner.randomize);
  CHECK(cfg.learner.schedule.kind == ScheduleSpec::Kind::geometric);
  CHECK(cfg.learner.seed == 99);

  const std::string canon = serialize_run_config(cfg);
  const RunConfig again = parse_run_config(canon);
  CHECK(serialize_run_config(again) == canon);
  CHECK(config_hash(again) == config_hash(cfg));
}

TEST_CASE("partial configs fill in defaults and omit unset noise") {
  const RunConfig cfg = parse_run_config(R"({"preset": "linear_2d"})");
  CHECK(!cfg.sigma.has_value());
  CHECK(cfg.learner.episodes == LearnerConfig{}.episodes);
  const std::string canon = serialize_run_config(cfg);
  CHECK(canon.find("\"sigma\"") == std::string::npos);
  // the noise key belongs to ou_control alone
  RunConfig bad = cfg;
  bad.sigma = 0.5;
  CHECK_THROWS_AS(build_preset(bad), ConfigError);
  CHECK(build_preset(cfg).name == "linear_2d");
  // without the key, ou_control falls back to its default level
  const RunConfig ou = parse_run_config(R"({"preset": "ou_control"})");
  CHECK(build_preset(ou).sigma == 0.5);
}

TEST_CASE("malformed configs are rejected with config errors") {
  CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"mystery": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"schema_version": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"preset": "nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"episodes": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"delta": 1.5})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"sigma": -1.0})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"value_rollouts": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"env_step_scale": 0.3})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"schedule": {"kind": "sometimes"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"schedule": {"ratio": 1.0,
                                        "kind": "geometric"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"schedule": {"kind": "explicit"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"episodes": "many"})"), ConfigError);
}

TEST_CASE("config hashes track content") {
  RunConfig a;
  a.sigma = 0.5;
  RunConfig b = a;
  CHECK(config_hash(a) == config_hash(a));
  CHECK(config_hash(a) == config_hash(b));
  b.learner.seed += 1;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("configs survive a disk round trip") {
  namespace fs = std::filesystem;
  fs::create_directories("t_envscfg");
  RunConfig cfg;
  cfg.sigma = 1.25;
  cfg.learner.seed = 1234;
  save_run_config(cfg, "t_envscfg/config.json");
  const RunConfig back = load_run_config("t_envscfg/config.json");
  CHECK(serialize_run_config(back) == serialize_run_config(cfg));
  CHECK_THROWS_AS(load_run_config("t_envscfg/absent.json"), ConfigError);
}

TEST_CASE("seventeen significant digits round-trip exactly") {
  for (double v : {1.0 / 3.0, 0.1, 1e-300, -2.5e17, 0.0,
                   0.53598150033144236, 10.819778284410283}) {
    const std::string s = format_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_g17(0.1) == "0.10000000000000001");
}

TEST_CASE("csv files carry schema and hash comments above the header") {
  CsvFile csv("ctmle.test.v1", "deadbeefdeadbeef", {"a", "b"});
  csv.add_row({"1", "2"});
  csv.add_row({format_g17(0.5), "x"});
  const std::string text = csv.str();
  CHECK(text.rfind("# schema=ctmle.test.v1\n# config_hash=deadbeefdeadbeef\n"
                   "a,b\n1,2\n",
                   0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');

  namespace fs = std::filesystem;
  fs::create_directories("t_envscfg");
  csv.write("t_envscfg/out.csv");
  CHECK(slurp("t_envscfg/out.csv") == text);
  CHECK_THROWS_AS(csv.write("t_envscfg/no_such_dir/out.csv"),
                  std::runtime_error);
}

TEST_CASE("sweep grids reject degenerate requests") {
  RunConfig base;
  base.sigma = 0.5;
  base.learner.episodes = 4;
  base.learner.value_rollouts = 8;
  CHECK_THROWS_AS(run_sweep_grid(base, {0.5}, {0.5}, 3, 0.05, 2, 64),
                  ConfigError);
  CHECK_THROWS_AS(run_sweep_grid(base, {0.3, 0.8}, {}, 3, 0.05, 2, 64),
                  ConfigError);
  CHECK_THROWS_AS(run_sweep_grid(base, {0.3, 0.8}, {0.5}, 2, 0.05, 2, 64),
                  ConfigError);
  CHECK_THROWS_AS(run_sweep_grid(base, {0.3, 0.8}, {-0.5}, 3, 0.05, 2, 64),
                  ConfigError);
  CHECK_THROWS_AS(run_sweep_grid(base, {0.3, 0.8}, {2.0}, 3, 0.05, 2, 64),
                  ConfigError);
  RunConfig other;
  other.preset = "linear_2d";
  CHECK_THROWS_AS(run_sweep_grid(other, {0.3, 0.8}, {0.5}, 3, 0.05, 2, 64),
                  ConfigError);
}

TEST_CASE("a tiny sweep grid fills every cell in order") {
  RunConfig base;
  base.sigma = 0.5;  // overwritten per row
  base.learner.episodes = 4;
  base.learner.value_rollouts = 8;
  base.learner.value_step_divisor = 64.0;
  base.learner.seed = 3;
  const SweepResult sweep =
      run_sweep_grid(base, {0.3, 0.8}, {0.5, 1.0}, 3, 0.05, 2, 64);
  REQUIRE(sweep.cells.size() == 4);
  REQUIRE(sweep.by_sigma.size() == 2);
  CHECK(sweep.cells[0].sigma == 0.3);
  CHECK(sweep.cells[0].gap == 0.5);
  CHECK(sweep.cells[1].gap == 1.0);
  CHECK(sweep.cells[2].sigma == 0.8);
  // randomized schedules take 2m measurements: 4 then 2 per episode
  CHECK(sweep.cells[0].mean_measurements == 16.0);
  CHECK(sweep.cells[1].mean_measurements == 8.0);
  for (const SweepCell& cell : sweep.cells) {
    CHECK(cell.seeds == 3);
    CHECK(cell.mean_episodes >= 1.0);
    CHECK(cell.mean_episodes <= 4.0);
    CHECK(cell.reach_fraction >= 0.0);
    CHECK(cell.reach_fraction <= 1.0);
    CHECK(cell.mean_coverage >= 0.0);
    CHECK(cell.mean_coverage <= 1.0);
  }
  for (const SigmaSummary& row : sweep.by_sigma) {
    CHECK((row.best_gap == 0.5 || row.best_gap == 1.0));
    CHECK(row.min_mean_episodes >= 1.0);
  }
  CHECK(sweep.spearman >= -1.0);
  CHECK(sweep.spearman <= 1.0);

  namespace fs = std::filesystem;
  fs::create_directories("t_envscfg");
  write_sweep_csv("t_envscfg/sweep.csv", sweep, base);
  write_sweep_summary("t_envscfg/sweep_summary.json", sweep, base);
  const std::string csv = slurp("t_envscfg/sweep.csv");
  CHECK(csv.rfind("# schema=ctmle.sweep.v1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3 + 4);
  const nlohmann::json s =
      nlohmann::json::parse(slurp("t_envscfg/sweep_summary.json"));
  CHECK(s.at("schema_version") == 1);
  CHECK(s.at("by_sigma").size() == 2);
  CHECK(s.at("n_cells") == 4);
}
