// End-to-end runs of the shipped experiment configurations through the CLI,
// plus the validation and reproducibility contracts.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("%s %s\n", ok ? "[ok]  " : "[FAIL]", what.c_str());
  if (!ok) ++failures;
}

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <rsub-binary> <configs-dir>\n", argv[0]);
    return 2;
  }
  const std::string bin = argv[1];
  const fs::path cfg = argv[2];
  const fs::path work = fs::temp_directory_path() / "rsub_cli_test";
  fs::remove_all(work);
  fs::create_directories(work);
  const auto in = [&](const std::string& name) {
    return (cfg / name).string();
  };
  const auto out = [&](const std::string& name) { return (work / name).string(); };

  // every shipped config runs end-to-end
  struct Job {
    const char* sub;
    const char* config;
    const char* artifact;
  };
  const std::vector<Job> jobs{
      {"fit", "table2_set1_fit.json", "fit.json"},
      {"fit", "table2_set2_fit.json", "fit.json"},
      {"simulate", "fig_diffusion_set1.json", "summed.csv"},
      {"analytic", "fig_diffusion_set1.json", "analytic.csv"},
      {"simulate", "fig_diffusion_set2.json", "summed.csv"},
      {"analytic", "fig_diffusion_set2.json", "analytic.csv"},
      {"msd", "fig_msd_set1.json", "regression.json"},
      {"msd", "fig_msd_set2.json", "regression.json"},
      {"simulate", "table3_annihilation_model1.json", "summed.csv"},
      {"analytic", "table3_annihilation_model1.json", "analytic.csv"},
      {"simulate", "table3_annihilation_model2.json", "summed.csv"},
      {"analytic", "table3_annihilation_model2.json", "analytic.csv"},
      {"simulate", "table4_mono_model1.json", "summed.csv"},
      {"steady", "table4_mono_model1.json", "steady.json"},
      {"simulate", "table4_mono_model2.json", "summed.csv"},
      {"simulate", "table5_bimol_reaction1.json", "summed.csv"},
      {"simulate", "table5_bimol_reaction2.json", "summed.csv"},
      {"simulate", "table5_bimol_reaction3.json", "summed.csv"},
      {"ssa", "ssa_diffusion.json", "ensemble.csv"},
      {"ssa", "ssa_mono.json", "ensemble.csv"},
      {"msd --stochastic", "mctrw_set1.json", "regression.json"},
  };
  int idx = 0;
  for (const auto& j : jobs) {
    const std::string dir = out("job" + std::to_string(idx++));
    const int rc = run(bin + " " + j.sub + " --config " + in(j.config) +
                       " --out " + dir);
    check(rc == 0 && fs::exists(fs::path(dir) / j.artifact),
          std::string(j.sub) + " " + j.config);
  }

  // byte-identical reproducibility for identical config + seed
  {
    const int r1 = run(bin + " fit --config " + in("table2_set1_fit.json") +
                       " --out " + out("rep1"));
    const int r2 = run(bin + " fit --config " + in("table2_set1_fit.json") +
                       " --out " + out("rep2"));
    check(r1 == 0 && r2 == 0 &&
              slurp(work / "rep1/fit.json") == slurp(work / "rep2/fit.json"),
          "fit reproducibility (byte-identical)");
    const int s1 = run(bin + " ssa --config " + in("ssa_diffusion.json") +
                       " --out " + out("rep3"));
    const int s2 = run(bin + " ssa --config " + in("ssa_diffusion.json") +
                       " --out " + out("rep4"));
    check(s1 == 0 && s2 == 0 &&
              slurp(work / "rep3/ensemble.csv") == slurp(work / "rep4/ensemble.csv"),
          "ssa reproducibility (byte-identical)");
  }

  // compare subcommand computes eps_tot from two CSVs
  {
    run(bin + " simulate --config " + in("fig_diffusion_set1.json") + " --out " +
        out("cmp"));
    run(bin + " analytic --config " + in("fig_diffusion_set1.json") + " --out " +
        out("cmp"));
    const int rc = run(bin + " compare --config " + in("fig_diffusion_set1.json") +
                       " --a " + out("cmp") + "/summed.csv --b " + out("cmp") +
                       "/analytic.csv --out " + out("cmp"));
    const std::string j = slurp(work / "cmp/compare.json");
    check(rc == 0 && j.find("eps_tot") != std::string::npos, "compare eps_tot");
  }

  // validation failures exit with code 1
  {
    std::ofstream bad(work / "bad.json");
    bad << "{\"alpha\": 0.5, \"bogus_key\": 1}";
    bad.close();
    check(run(bin + " fit --config " + (work / "bad.json").string()) == 1,
          "unknown key rejected with exit 1");
    const int rc = run(bin + " analytic --config " + in("fig_diffusion_set1.json") +
                       " --set alpha=0.75 --out " + out("a75"));
    check(rc == 1, "analytic with alpha != 1/2 rejected with exit 1");
    check(run(bin + " fit --config /nonexistent.json") == 1,
          "missing config rejected with exit 1");
  }

  // dotted --set override reaches nested keys
  {
    const int rc = run(bin + " fit --config " + in("table2_set1_fit.json") +
                       " --set fit.multistarts=2 --out " + out("ov"));
    check(rc == 0 && fs::exists(work / "ov/fit.json"), "--set nested override");
  }

  std::printf("cli test: %s\n", failures == 0 ? "all passed" : "FAILURES");
  return failures == 0 ? 0 : 1;
}
