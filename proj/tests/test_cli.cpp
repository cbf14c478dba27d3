// End-to-end checks of the installed command line interface: exit codes,
// artifact layout, and byte-level rerun determinism. argv[1] must hold the
// path to the ctmle binary; ctest passes it from the build tree.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

int run_cmd(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -2;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-ctmle-binary>\n");
    return 1;
  }
  const std::string bin = std::string("\"") + argv[1] + "\"";
  const std::string quiet = " > /dev/null";

  namespace fs = std::filesystem;
  fs::remove_all("t_cli");
  fs::create_directories("t_cli");

  check(run_cmd(bin + " --version" + quiet) == 0, "--version exits 0");
  check(run_cmd(bin + " --help" + quiet) == 0, "--help exits 0");
  check(run_cmd(bin + quiet + " 2> /dev/null") == 2,
        "missing subcommand exits 2");
  check(run_cmd(bin + " run --bogus --out t_cli/x" + quiet + " 2> /dev/null") ==
            2,
        "unknown flag exits 2");
  check(run_cmd(bin + " run" + quiet + " 2> /dev/null") == 2,
        "missing --out exits 2");
  check(run_cmd(bin + " run --preset nope --out t_cli/x" + quiet +
                " 2> /dev/null") == 2,
        "unknown preset exits 2");
  check(run_cmd(bin + " run --preset linear_2d --sigma 0.4 --out t_cli/x2" +
                quiet + " 2> /dev/null") == 2,
        "noise level on a fixed-noise preset exits 2");
  check(run_cmd(bin + " run --config t_cli/absent.json --out t_cli/x3" +
                quiet + " 2> /dev/null") == 2,
        "missing config file exits 2");
  check(run_cmd(bin + " run --gap -0.5 --out t_cli/x4" + quiet +
                " 2> /dev/null") == 2,
        "negative gap exits 2");
  check(run_cmd(bin + " verify --suite nope" + quiet + " 2> /dev/null") == 2,
        "unknown verify suite exits 2");
  check(run_cmd(bin + " complexity --lambdas 2.0" + quiet +
                " 2> /dev/null") == 2,
        "lambda outside [0, 1] exits 2");
  check(run_cmd(bin + " complexity --d -1" + quiet + " 2> /dev/null") == 2,
        "nonpositive complexity exits 2");

  check(run_cmd(bin + " complexity" + quiet) == 0, "complexity exits 0");
  check(run_cmd(bin +
                " verify --suite eluder --quick --json t_cli/verify.json" +
                quiet) == 0,
        "eluder verify suite passes");
  const std::string vjson = slurp("t_cli/verify.json");
  check(contains(vjson, "\"suite\""), "verify report JSON written");
  check(contains(vjson, "\"checks\""), "verify report lists its checks");

  const std::string run_flags =
      " run --preset ou_control --sigma 0.5 --episodes 3 --seed 5 --gap 0.5"
      " --value-rollouts 8 --oracle-rollouts 64 --variance-rollouts 64 --out ";
  check(run_cmd(bin + run_flags + "t_cli/run1" + quiet) == 0,
        "tiny run exits 0");
  for (const char* name : {"config.json", "episodes.csv", "regret.csv",
                           "summary.json", "seeds.json"})
    check(fs::exists(fs::path("t_cli/run1") / name),
          std::string("run writes ") + name);
  check(!fs::exists("t_cli/run1/error.json"), "clean run leaves no marker");
  check(contains(slurp("t_cli/run1/episodes.csv"),
                 "# schema=ctmle.episodes.v1"),
        "episodes.csv names its schema");
  check(contains(slurp("t_cli/run1/regret.csv"), "# schema=ctmle.regret.v1"),
        "regret.csv names its schema");
  const std::string summary = slurp("t_cli/run1/summary.json");
  check(contains(summary, "\"schema_version\""), "summary has a version");
  check(contains(summary, "\"bound_rhs\""), "summary has the bound");
  check(contains(summary, "\"lambda_complexity_half\""),
        "summary has the cost mixtures");
  check(contains(slurp("t_cli/run1/seeds.json"), "\"purpose_streams\""),
        "seeds.json documents the stream layout");

  check(run_cmd(bin + run_flags + "t_cli/run2" + quiet) == 0,
        "rerun exits 0");
  for (const char* name : {"config.json", "episodes.csv", "regret.csv",
                           "seeds.json"}) {
    const std::string a = slurp(std::string("t_cli/run1/") + name);
    const std::string b = slurp(std::string("t_cli/run2/") + name);
    check(!a.empty() && a == b,
          std::string("rerun reproduces ") + name + " byte for byte");
  }

  std::ofstream cfg("t_cli/sweep_base.json");
  cfg << "{\"preset\": \"ou_control\", \"episodes\": 3, \"value_rollouts\": 8,"
         " \"value_step_divisor\": 64, \"seed\": 3}\n";
  cfg.close();
  check(run_cmd(bin +
                " sweep --config t_cli/sweep_base.json --out t_cli/sw"
                " --sigmas 0.3 0.8 --gaps 0.5 1.0 --seeds 3 --eps 0.05"
                " --window 2 --oracle-rollouts 64" +
                quiet) == 0,
        "tiny sweep exits 0");
  for (const char* name : {"config.json", "sweep.csv", "sweep_summary.json"})
    check(fs::exists(fs::path("t_cli/sw") / name),
          std::string("sweep writes ") + name);
  check(contains(slurp("t_cli/sw/sweep.csv"), "# schema=ctmle.sweep.v1"),
        "sweep.csv names its schema");
  check(contains(slurp("t_cli/sw/sweep_summary.json"), "\"spearman\""),
        "sweep summary has the trend statistic");

  std::printf("test_cli: %s (%d failures)\n",
              g_failures == 0 ? "all checks passed" : "FAILED", g_failures);
  return g_failures == 0 ? 0 : 1;
}
