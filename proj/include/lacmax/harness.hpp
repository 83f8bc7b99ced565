#pragma once

#include <cstdint>
#include <string>

#include "lacmax/exceptional.hpp"
#include "lacmax/heights.hpp"

namespace lacmax {

// Test-function families.  Every family is a characteristic function except
// multilevel, whose values are dyadic and span distinct level sets.  Supports
// are placed inside the central quarter of the domain so that every scale up
// to 2^k_max with 2*2^k_max <= 3L/8 stays clear of the boundary.
struct FamilySpec {
  std::string kind = "cube";  // cube | scattered-cubes | cantor | multilevel
  double side = 0.25;         // cube, scattered-cubes
  int count = 8;              // scattered-cubes
  int depth = 3;              // cantor
  double ratio = 0.25;        // cantor
  int levels = 4;             // multilevel
};

GranularFunction generate(const FamilySpec& fam, const Lattice& lat, uint64_t seed);

struct ExperimentSpec {
  int log2_len = 3;
  int log2_grain = -6;
  std::vector<FamilySpec> families;
  std::vector<double> alphas = {0.25, 0.125, 0.0625, 0.03125};
  std::vector<uint64_t> seeds = {1, 2, 3};
  ScaleRange range{-3, 0};
  ExceptionalKnobs knobs = desk_knobs();
  bool dump_pgm = false;
  bool dump_detail = false;  // per-row exceptional/heights CSVs
  bool record_timing = true;
  std::string out_dir;

  // the source constants (100, 2^-10, ...) degenerate at desk scale; the
  // defaults here keep every band nonempty, --paper-constants restores them
  static ExceptionalKnobs desk_knobs() {
    ExceptionalKnobs k;
    k.c_stop = 0.015625;  // 2^-6
    k.c_iter = 2.0;
    k.c_k2 = 4.0;
    return k;
  }
};

ExperimentSpec spec_from_json(const std::string& text);
std::string spec_to_json(const ExperimentSpec& spec);

// alpha * |{Mf > alpha}| / int |f| Log^3(|f|/alpha); NaN when f == 0.
double weak_type_ratio(const GranularFunction& f, double alpha, ScaleRange range);

// Same with the denominator strengthened by (Log^4(|f|/alpha))^(1+eps).
double extrapolation_ratio(const GranularFunction& f, double alpha, double eps,
                           ScaleRange range);

// Splits f by the dyadic level sets of its values (each piece has Log^3 of
// |f|/alpha essentially constant): piece i collects cells with
// value in (2^-i-1, 2^-i].  Values are clamped into [alpha, 1] first.
std::vector<std::pair<int, GranularFunction>> level_split(const GranularFunction& f,
                                                          double alpha);

struct RunRow {
  std::string family;
  std::string params;
  uint64_t seed = 0;
  double alpha = 0.0;
  double mass_f = 0.0;
  double wt_ratio = 0.0;  // NaN = n/a
  double extrap_01 = 0.0;
  double extrap_1 = 0.0;
  int n_levels = 0;
  bool level_recon_ok = false;
  double omega_measure = 0.0;
  int n_whitney = 0;
  bool whitney_ok = false;
  double bq_moment_max = 0.0;
  double recon_err = 0.0;
  double width_r_min = 0.0;
  double width_r_max = 0.0;
  double width_w_max = 0.0;
  int ladder_n_max = 0;
  double c_pt = 0.0;
  double c_dom = 0.0;
  int n_exc_rows = 0;
  bool pigeonhole_ok = true;
  bool s_monotone_ok = true;
  double c_size = 0.0;
  double c_a = 0.0;
  double telescope_resid = 0.0;
  bool heavy_contained = true;
  double c_l1_offset_max = 0.0;
  double c_l1_total = 0.0;
  double c_l2 = 0.0;
  double l2_scale_ratio = 0.0;
  bool invariants_pass = false;
  double runtime_ms = 0.0;
};

struct RunReport {
  std::vector<RunRow> rows;
  bool all_pass = true;
  std::string csv_text;  // the exact bytes written to report.csv
};

// Full pipeline per (family, seed, alpha): maximal function and ratios,
// Omega/Whitney, moments, density decomposition, exceptional sets, heights.
// A stage error marks the row failed with the reason recorded; the run
// continues.  Writes report.csv (and dumps) under spec.out_dir when set.
RunReport run(const ExperimentSpec& spec);

}  // namespace lacmax
