/* Exercises the C interface from plain C. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "dipole/dipole.h"

static int failures = 0;

#define EXPECT(cond)                                             \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                \
    }                                                            \
  } while (0)

int main(int argc, char** argv) {
  const char* work = argc > 1 ? argv[1] : "capi_work";
  char path[1024];

  EXPECT(strlen(dp_version()) > 0);
  EXPECT(dp_subcommand_count() == 8);
  EXPECT(strcmp(dp_subcommand_name(0), "kernel") == 0);
  EXPECT(dp_subcommand_name(99) == NULL);

  dp_config* cfg = NULL;
  EXPECT(dp_config_create(&cfg) == DP_OK);
  EXPECT(dp_config_set(cfg, "no_such_key", "1") == DP_ERR_INVALID_ARGUMENT);
  EXPECT(strstr(dp_last_error(), "no_such_key") != NULL);
  EXPECT(dp_config_create(NULL) == DP_ERR_INVALID_ARGUMENT);

  EXPECT(dp_config_set(cfg, "L", "2") == DP_OK);
  EXPECT(dp_config_set(cfg, "threads", "1") == DP_OK);
  snprintf(path, sizeof path, "%s/out", work);
  EXPECT(dp_config_set(cfg, "out", path) == DP_OK);
  snprintf(path, sizeof path, "%s/cache", work);
  EXPECT(dp_config_set(cfg, "cache", path) == DP_OK);
  EXPECT(dp_config_validate(cfg) == DP_OK);

  /* Size query, then copy. */
  size_t needed = 0;
  EXPECT(dp_config_text(cfg, NULL, 0, &needed) == DP_ERR_BUFFER_TOO_SMALL);
  EXPECT(needed > 1);
  char* text = (char*)malloc(needed);
  EXPECT(dp_config_text(cfg, text, needed, &needed) == DP_OK);
  EXPECT(strstr(text, "L = 2") != NULL);
  dp_config* copy = NULL;
  EXPECT(dp_config_create(&copy) == DP_OK);
  EXPECT(dp_config_parse(copy, text) == DP_OK);
  free(text);

  dp_config* bad = NULL;
  EXPECT(dp_config_create(&bad) == DP_OK);
  EXPECT(dp_config_set(bad, "dim", "9") == DP_OK);
  EXPECT(dp_config_set(bad, "L", "1") == DP_OK);
  EXPECT(dp_config_validate(bad) == DP_ERR_INVALID_ARGUMENT);
  EXPECT(strstr(dp_last_error(), "dim") != NULL && strstr(dp_last_error(), "L must") != NULL);
  dp_config_destroy(bad);

  dp_report* report = NULL;
  EXPECT(dp_run(copy, "report", 0, &report) == DP_ERR_NOT_FOUND);
  EXPECT(strstr(dp_last_error(), "nothing to aggregate") != NULL);
  EXPECT(dp_run(copy, "groundstate", 0, &report) == DP_OK);
  EXPECT(dp_report_passed(report) == 1);
  EXPECT(dp_report_size(report) == 3);
  EXPECT(dp_report_count(report, DP_FAIL) == 0);
  const char* name = NULL;
  dp_verdict verdict = DP_FAIL;
  double margin = 0;
  EXPECT(dp_report_check(report, 0, &name, &verdict, &margin) == DP_OK);
  EXPECT(strcmp(name, "ground_state_degeneracy") == 0 && verdict == DP_PASS && margin >= 0);
  EXPECT(dp_report_check(report, 3, &name, &verdict, &margin) == DP_ERR_INVALID_ARGUMENT);
  char small[8];
  EXPECT(dp_report_json(report, 0, small, sizeof small, &needed) == DP_ERR_BUFFER_TOO_SMALL);
  char* json = (char*)malloc(needed);
  EXPECT(dp_report_json(report, 0, json, needed, &needed) == DP_OK);
  EXPECT(strstr(json, "\"schema_version\"") != NULL);
  EXPECT(strstr(json, "\"seconds\"") == NULL);
  free(json);
  dp_report_destroy(report);
  dp_config_destroy(copy);
  dp_config_destroy(cfg);

  dp_kernel* k = NULL;
  EXPECT(dp_kernel_build(3, 2, 0.0, 0.0, &k) == DP_OK);
  int dim = 0, half = 0, cutoff = 0;
  double eps = 0, tail = 1;
  EXPECT(dp_kernel_info(k, &dim, &half, &eps, &cutoff, &tail) == DP_OK);
  EXPECT(dim == 3 && half == 2 && fabs(eps - 0.25) < 1e-15 && tail <= 1e-12);
  double e0 = 0;
  EXPECT(dp_kernel_e0(k, &e0) == DP_OK);
  EXPECT(fabs(e0 - (-0.421227114912)) < 1e-9);
  /* W is even and periodic with period 4. */
  int x[3] = {1, 0, 2}, mx[3] = {-1, 0, -2}, px[3] = {5, -4, 6};
  double a[9], b[9], c[9];
  EXPECT(dp_kernel_entry(k, x, a) == DP_OK);
  EXPECT(dp_kernel_entry(k, mx, b) == DP_OK);
  EXPECT(dp_kernel_entry(k, px, c) == DP_OK);
  for (int i = 0; i < 9; ++i) EXPECT(a[i] == b[i] && a[i] == c[i]);
  EXPECT(a[1] == a[3]);
  snprintf(path, sizeof path, "%s/k.dipw", work);
  EXPECT(dp_kernel_save(k, path) == DP_OK);
  dp_kernel* k2 = NULL;
  EXPECT(dp_kernel_load(path, &k2) == DP_OK);
  double d2[9];
  EXPECT(dp_kernel_entry(k2, x, d2) == DP_OK);
  for (int i = 0; i < 9; ++i) EXPECT(d2[i] == a[i]);
  dp_kernel_destroy(k2);
  dp_kernel_destroy(k);
  EXPECT(dp_kernel_build(2, 2, 0.0, 0.0, &k) == DP_ERR_INVALID_ARGUMENT);
  snprintf(path, sizeof path, "%s/missing.dipw", work);
  EXPECT(dp_kernel_load(path, &k) != DP_OK);

  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("C interface: all checks passed\n");
  return failures ? 1 : 0;
}
