#include "lacmax.h"

#include <cstring>
#include <string>

#include "json.hpp"
#include "lacmax/harness.hpp"

using namespace lacmax;

struct lacmax_function {
  GranularFunction fn;
};
struct lacmax_set {
  GridSet set;
};

namespace {

void put_err(char* errmsg, int errmsg_len, const char* what) {
  if (!errmsg || errmsg_len <= 0) return;
  std::strncpy(errmsg, what, size_t(errmsg_len) - 1);
  errmsg[errmsg_len - 1] = '\0';
}

template <typename Fn>
int guarded(char* errmsg, int errmsg_len, Fn&& fn) {
  try {
    return fn();
  } catch (const ResolutionError& e) {
    put_err(errmsg, errmsg_len, e.what());
    return LACMAX_ERESOLUTION;
  } catch (const std::domain_error& e) {
    put_err(errmsg, errmsg_len, e.what());
    return LACMAX_EDOMAIN;
  } catch (const std::invalid_argument& e) {
    put_err(errmsg, errmsg_len, e.what());
    return LACMAX_EINVAL;
  } catch (const std::exception& e) {
    put_err(errmsg, errmsg_len, e.what());
    return LACMAX_EINTERNAL;
  }
}

}  // namespace

extern "C" {

const char* lacmax_version(void) { return "1.0.0"; }

const char* lacmax_strerror(int code) {
  switch (code) {
    case LACMAX_OK: return "ok";
    case LACMAX_REPORT_FAIL: return "run completed with failing invariant columns";
    case LACMAX_EINVAL: return "invalid argument";
    case LACMAX_EDOMAIN: return "domain error";
    case LACMAX_ERESOLUTION: return "grid resolution too coarse";
    case LACMAX_EIO: return "i/o error";
    case LACMAX_EINTERNAL: return "internal error";
    default: return "unknown error";
  }
}

int lacmax_function_create(int log2_len, int log2_grain, lacmax_function** out,
                           char* errmsg, int errmsg_len) {
  if (!out) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    if (log2_len <= log2_grain || log2_len - log2_grain > 12)
      throw std::invalid_argument("lattice must have 2..4096 cells per side");
    *out = new lacmax_function{GranularFunction(Lattice{log2_len, log2_grain})};
    return LACMAX_OK;
  });
}

int lacmax_function_generate(int log2_len, int log2_grain, const char* family_json,
                             unsigned long long seed, lacmax_function** out,
                             char* errmsg, int errmsg_len) {
  if (!out || !family_json) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    nlohmann::json j = nlohmann::json::parse(family_json);
    FamilySpec fam;
    fam.kind = j.value("kind", fam.kind);
    fam.side = j.value("side", fam.side);
    fam.count = j.value("count", fam.count);
    fam.depth = j.value("depth", fam.depth);
    fam.ratio = j.value("ratio", fam.ratio);
    fam.levels = j.value("levels", fam.levels);
    *out = new lacmax_function{
        generate(fam, Lattice{log2_len, log2_grain}, uint64_t(seed))};
    return LACMAX_OK;
  });
}

int lacmax_function_load_csv(const char* csv_path, const char* json_path,
                             lacmax_function** out, char* errmsg, int errmsg_len) {
  if (!out || !csv_path || !json_path) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    *out = new lacmax_function{load_function_csv(csv_path, json_path)};
    return LACMAX_OK;
  });
}

int lacmax_function_save_csv(const lacmax_function* f, const char* csv_path,
                             const char* json_path, char* errmsg, int errmsg_len) {
  if (!f || !csv_path || !json_path) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    save_function_csv(f->fn, csv_path, json_path);
    return LACMAX_OK;
  });
}

int lacmax_function_set_cell(lacmax_function* f, int ix, int iy, double value) {
  if (!f || ix < 0 || iy < 0 || ix >= f->fn.n() || iy >= f->fn.n() || value < 0)
    return LACMAX_EINVAL;
  f->fn.at(ix, iy) = value;
  return LACMAX_OK;
}

int lacmax_function_mass(const lacmax_function* f, double* out) {
  if (!f || !out) return LACMAX_EINVAL;
  *out = mass(f->fn);
  return LACMAX_OK;
}

int lacmax_function_info(const lacmax_function* f, int* n, double* delta, double* len) {
  if (!f) return LACMAX_EINVAL;
  if (n) *n = f->fn.n();
  if (delta) *delta = f->fn.lattice().delta();
  if (len) *len = f->fn.lattice().len();
  return LACMAX_OK;
}

void lacmax_function_destroy(lacmax_function* f) { delete f; }

int lacmax_iterated_log(int n, double t, double* out, char* errmsg, int errmsg_len) {
  if (!out) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    *out = iterated_log(n, t);
    return LACMAX_OK;
  });
}

int lacmax_spherical_mean(const lacmax_function* f, int k, lacmax_function** out,
                          char* errmsg, int errmsg_len) {
  if (!f || !out) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    *out = new lacmax_function{spherical_mean(f->fn, k)};
    return LACMAX_OK;
  });
}

int lacmax_lacunary_maximal(const lacmax_function* f, int kmin, int kmax,
                            lacmax_function** out, char* errmsg, int errmsg_len) {
  if (!f || !out) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    *out = new lacmax_function{lacunary_maximal(f->fn, ScaleRange{kmin, kmax})};
    return LACMAX_OK;
  });
}

int lacmax_superlevel(const lacmax_function* g, double alpha, lacmax_set** out,
                      char* errmsg, int errmsg_len) {
  if (!g || !out) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    *out = new lacmax_set{superlevel(g->fn, alpha)};
    return LACMAX_OK;
  });
}

int lacmax_set_measure(const lacmax_set* s, double* out) {
  if (!s || !out) return LACMAX_EINVAL;
  *out = s->set.measure();
  return LACMAX_OK;
}

int lacmax_set_save_pgm(const lacmax_set* s, const char* path, char* errmsg,
                        int errmsg_len) {
  if (!s || !path) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    save_pgm(s->set, path);
    return LACMAX_OK;
  });
}

void lacmax_set_destroy(lacmax_set* s) { delete s; }

int lacmax_run_experiment(const char* spec_json, const char* out_dir, char* errmsg,
                          int errmsg_len) {
  if (!spec_json) return LACMAX_EINVAL;
  return guarded(errmsg, errmsg_len, [&] {
    ExperimentSpec spec = spec_from_json(spec_json);
    if (out_dir && *out_dir) spec.out_dir = out_dir;
    RunReport rep = run(spec);
    return rep.all_pass ? LACMAX_OK : LACMAX_REPORT_FAIL;
  });
}

}  // extern "C"
