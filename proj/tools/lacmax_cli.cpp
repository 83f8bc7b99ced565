// lacmax command line tool; uses only the C API of the shared library.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lacmax.h"

namespace {

int fail(int code, const char* errmsg) {
  std::fprintf(stderr, "error: %s (%s)\n", errmsg[0] ? errmsg : "?",
               lacmax_strerror(code));
  return code < 0 ? 2 : code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lacunary spherical maximal operator toolkit"};
  app.require_subcommand(1);
  char errmsg[512] = {0};

  // ---- run ----
  auto* run_cmd = app.add_subcommand("run", "run an experiment from a JSON spec");
  std::string spec_path, out_dir, family_override;
  std::vector<double> alphas;
  std::vector<std::string> grid;
  int kmin = 0, kmax = 0;
  bool has_k = false, paper_constants = false, dump_exceptional = false;
  std::vector<unsigned long long> seeds;
  run_cmd->add_option("--spec", spec_path, "experiment spec JSON file");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--grid", grid,
                      "override grid as log2_len,log2_grain (e.g. 3,-6)");
  run_cmd->add_option("--alpha", alphas, "override alpha list");
  run_cmd->add_option("--family", family_override,
                      "override families with a single kind");
  run_cmd->add_option("--seed", seeds, "override seed list");
  auto* okmin = run_cmd->add_option("--kmin", kmin, "smallest scale 2^k");
  run_cmd->add_option("--kmax", kmax, "largest scale 2^k");
  run_cmd->add_flag("--paper-constants", paper_constants,
                    "use the source constants instead of desk-scale knobs");
  run_cmd->add_flag("--dump-exceptional", dump_exceptional,
                    "write per-row exceptional/heights CSVs and PGM dumps");

  // ---- generate ----
  auto* gen_cmd = app.add_subcommand("generate", "write a test function to CSV/PGM");
  std::string gen_kind = "cube", gen_out = "function";
  int gen_log2_len = 3, gen_log2_grain = -6, gen_count = 8, gen_depth = 3,
      gen_levels = 4;
  double gen_side = 0.25, gen_ratio = 0.25;
  unsigned long long gen_seed = 1;
  gen_cmd->add_option("--family", gen_kind, "cube|scattered-cubes|cantor|multilevel");
  gen_cmd->add_option("--out", gen_out, "output path prefix");
  gen_cmd->add_option("--log2-len", gen_log2_len, "domain side 2^a");
  gen_cmd->add_option("--log2-grain", gen_log2_grain, "grain 2^-g");
  gen_cmd->add_option("--side", gen_side, "cube side");
  gen_cmd->add_option("--count", gen_count, "scattered cube count");
  gen_cmd->add_option("--depth", gen_depth, "cantor depth");
  gen_cmd->add_option("--ratio", gen_ratio, "cantor ratio");
  gen_cmd->add_option("--levels", gen_levels, "multilevel levels");
  gen_cmd->add_option("--seed", gen_seed, "seed");

  // ---- maximal ----
  auto* max_cmd =
      app.add_subcommand("maximal", "compute M f and dump the superlevel set");
  std::string max_csv, max_json, max_out = "superlevel.pgm";
  double max_alpha = 0.25;
  int max_kmin = -3, max_kmax = 0;
  max_cmd->add_option("--csv", max_csv, "function CSV path")->required();
  max_cmd->add_option("--json", max_json, "function JSON header path")->required();
  max_cmd->add_option("--alpha", max_alpha, "level");
  max_cmd->add_option("--kmin", max_kmin, "smallest scale 2^k");
  max_cmd->add_option("--kmax", max_kmax, "largest scale 2^k");
  max_cmd->add_option("--out", max_out, "output PGM path");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) {
    nlohmann::json spec = nlohmann::json::object();
    if (!spec_path.empty()) {
      std::ifstream f(spec_path);
      if (!f) {
        std::fprintf(stderr, "error: cannot open %s\n", spec_path.c_str());
        return 2;
      }
      f >> spec;
    }
    if (grid.size() == 2) {
      spec["log2_len"] = std::stoi(grid[0]);
      spec["log2_grain"] = std::stoi(grid[1]);
    }
    if (!alphas.empty()) spec["alphas"] = alphas;
    if (!seeds.empty()) spec["seeds"] = seeds;
    if (!family_override.empty())
      spec["families"] = nlohmann::json::array({{{"kind", family_override}}});
    if (okmin->count()) spec["kmin"] = kmin;
    if (run_cmd->count("--kmax")) spec["kmax"] = kmax;
    if (paper_constants) spec["paper_constants"] = true;
    if (dump_exceptional) {
      spec["dump_exceptional"] = true;
      spec["dump_pgm"] = true;
    }
    if (!spec.contains("families"))
      spec["families"] = nlohmann::json::array({{{"kind", "cube"}}});
    int rc = lacmax_run_experiment(spec.dump().c_str(),
                                   out_dir.empty() ? nullptr : out_dir.c_str(), errmsg,
                                   sizeof errmsg);
    if (rc != LACMAX_OK && rc != LACMAX_REPORT_FAIL) return fail(rc, errmsg);
    std::printf("%s\n", rc == LACMAX_OK ? "all invariant columns pass"
                                        : "some invariant columns FAILED");
    return rc;
  }

  if (gen_cmd->parsed()) {
    nlohmann::json fam = {{"kind", gen_kind},   {"side", gen_side},
                          {"count", gen_count}, {"depth", gen_depth},
                          {"ratio", gen_ratio}, {"levels", gen_levels}};
    lacmax_function* f = nullptr;
    int rc = lacmax_function_generate(gen_log2_len, gen_log2_grain,
                                      fam.dump().c_str(), gen_seed, &f, errmsg,
                                      sizeof errmsg);
    if (rc != LACMAX_OK) return fail(rc, errmsg);
    rc = lacmax_function_save_csv(f, (gen_out + ".csv").c_str(),
                                  (gen_out + ".json").c_str(), errmsg, sizeof errmsg);
    double m = 0;
    lacmax_function_mass(f, &m);
    lacmax_function_destroy(f);
    if (rc != LACMAX_OK) return fail(rc, errmsg);
    std::printf("wrote %s.csv / %s.json (mass %.9g)\n", gen_out.c_str(),
                gen_out.c_str(), m);
    return 0;
  }

  if (max_cmd->parsed()) {
    lacmax_function* f = nullptr;
    int rc = lacmax_function_load_csv(max_csv.c_str(), max_json.c_str(), &f, errmsg,
                                      sizeof errmsg);
    if (rc != LACMAX_OK) return fail(rc, errmsg);
    lacmax_function* mf = nullptr;
    rc = lacmax_lacunary_maximal(f, max_kmin, max_kmax, &mf, errmsg, sizeof errmsg);
    lacmax_function_destroy(f);
    if (rc != LACMAX_OK) return fail(rc, errmsg);
    lacmax_set* s = nullptr;
    rc = lacmax_superlevel(mf, max_alpha, &s, errmsg, sizeof errmsg);
    lacmax_function_destroy(mf);
    if (rc != LACMAX_OK) return fail(rc, errmsg);
    double meas = 0;
    lacmax_set_measure(s, &meas);
    rc = lacmax_set_save_pgm(s, max_out.c_str(), errmsg, sizeof errmsg);
    lacmax_set_destroy(s);
    if (rc != LACMAX_OK) return fail(rc, errmsg);
    std::printf("|{Mf > %g}| = %.9g, wrote %s\n", max_alpha, meas, max_out.c_str());
    return 0;
  }

  return 0;
}
