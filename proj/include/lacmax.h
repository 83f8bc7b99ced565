/* C API for the lacmax shared library.
 *
 * All functions return LACMAX_OK (0) on success, a negative code on error,
 * or 1 from lacmax_run_experiment when the run completed but an invariant
 * column failed.  When a function takes (errmsg, errmsg_len), a description
 * of the failure is copied there on error.  Handles are opaque and owned by
 * the caller via the matching _destroy call.
 */
#ifndef LACMAX_H
#define LACMAX_H

#ifdef __cplusplus
extern "C" {
#endif

#define LACMAX_OK 0
#define LACMAX_REPORT_FAIL 1
#define LACMAX_EINVAL (-1)
#define LACMAX_EDOMAIN (-2)
#define LACMAX_ERESOLUTION (-3)
#define LACMAX_EIO (-4)
#define LACMAX_EINTERNAL (-5)

typedef struct lacmax_function lacmax_function; /* granular function */
typedef struct lacmax_set lacmax_set;           /* cell bitmap */

const char* lacmax_version(void);
const char* lacmax_strerror(int code);

/* ---- granular functions ---- */

/* Empty function on the lattice [0, 2^log2_len)^2 with grain 2^log2_grain. */
int lacmax_function_create(int log2_len, int log2_grain, lacmax_function** out,
                           char* errmsg, int errmsg_len);

/* Build a test-function family; family_json holds {"kind": "cube", ...} with
 * the fields of the harness family spec. */
int lacmax_function_generate(int log2_len, int log2_grain, const char* family_json,
                             unsigned long long seed, lacmax_function** out,
                             char* errmsg, int errmsg_len);

int lacmax_function_load_csv(const char* csv_path, const char* json_path,
                             lacmax_function** out, char* errmsg, int errmsg_len);
int lacmax_function_save_csv(const lacmax_function* f, const char* csv_path,
                             const char* json_path, char* errmsg, int errmsg_len);
int lacmax_function_set_cell(lacmax_function* f, int ix, int iy, double value);
int lacmax_function_mass(const lacmax_function* f, double* out);
int lacmax_function_info(const lacmax_function* f, int* n, double* delta, double* len);
void lacmax_function_destroy(lacmax_function* f);

/* ---- operators ---- */

int lacmax_iterated_log(int n, double t, double* out, char* errmsg, int errmsg_len);

/* A_k f: spherical mean at radius 2^k. */
int lacmax_spherical_mean(const lacmax_function* f, int k, lacmax_function** out,
                          char* errmsg, int errmsg_len);

/* M f over k in [kmin, kmax]. */
int lacmax_lacunary_maximal(const lacmax_function* f, int kmin, int kmax,
                            lacmax_function** out, char* errmsg, int errmsg_len);

/* {g > alpha} */
int lacmax_superlevel(const lacmax_function* g, double alpha, lacmax_set** out,
                      char* errmsg, int errmsg_len);

/* ---- sets ---- */

int lacmax_set_measure(const lacmax_set* s, double* out);
int lacmax_set_save_pgm(const lacmax_set* s, const char* path, char* errmsg,
                        int errmsg_len);
void lacmax_set_destroy(lacmax_set* s);

/* ---- experiments ---- */

/* Runs the full experiment pipeline from a JSON spec (see README for the
 * schema).  Writes report.csv and any dumps under out_dir (overrides the
 * spec's out_dir when non-NULL).  Returns LACMAX_OK when every invariant
 * column passed, LACMAX_REPORT_FAIL when the run completed with failures. */
int lacmax_run_experiment(const char* spec_json, const char* out_dir, char* errmsg,
                          int errmsg_len);

#ifdef __cplusplus
}
#endif

#endif /* LACMAX_H */
