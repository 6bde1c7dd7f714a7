#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "sidiff/sidiff.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void test_errors(void) {
  sidiff_potential* p = NULL;
  EXPECT(sidiff_potential_create("no_such_potential", NULL, NULL, 0, &p) == SIDIFF_E_CONFIG);
  EXPECT(p == NULL);
  EXPECT(strlen(sidiff_last_error()) > 0);
  EXPECT(sidiff_potential_create("double_well", NULL, NULL, 0, NULL) == SIDIFF_E_INVALID_ARGUMENT);
  EXPECT(strcmp(sidiff_status_name(SIDIFF_E_RESOLUTION), "resolution") == 0);

  EXPECT(sidiff_potential_create("double_well", NULL, NULL, 0, &p) == SIDIFF_OK);
  EXPECT(strlen(sidiff_last_error()) == 0);
  double x[2] = {NAN, 0.0};
  double v = 0.0;
  EXPECT(sidiff_potential_eval(p, x, &v, NULL, NULL) == SIDIFF_E_DOMAIN);
  double gap = 0.0;
  EXPECT(sidiff_spectral_gap(p, 0.25, INFINITY, 0.5, &gap) == SIDIFF_E_RESOLUTION);
  sidiff_potential_destroy(p);
}

static void test_potential(void) {
  const char* names[] = {"h_minus", "h_plus", "barrier"};
  const double values[] = {2.0, 8.0, 1.0};
  sidiff_potential* p = NULL;
  EXPECT(sidiff_potential_create("spline_twowell", names, values, 3, &p) == SIDIFF_OK);
  EXPECT(sidiff_potential_dimension(p) == 1);
  double x[2] = {0.0, 0.0};
  double v = 0.0, g[2], h[3];
  EXPECT(sidiff_potential_eval(p, x, &v, g, h) == SIDIFF_OK);
  EXPECT(fabs(v - 1.0) < 1e-12);
  EXPECT(fabs(h[0] + 4.0) < 1e-9);

  size_t count = 0;
  EXPECT(sidiff_potential_critical_points(p, NULL, 0, &count) == SIDIFF_OK);
  EXPECT(count == 3);
  sidiff_critical_point pts[3];
  EXPECT(sidiff_potential_critical_points(p, pts, 1, &count) == SIDIFF_E_BUFFER_TOO_SMALL);
  EXPECT(sidiff_potential_critical_points(p, pts, 3, &count) == SIDIFF_OK);
  EXPECT(pts[0].kind == SIDIFF_LOCAL_MIN && pts[1].kind == SIDIFF_LOCAL_MAX);
  EXPECT(fabs(pts[2].hessian_det - 8.0) < 1e-8);

  double osc = 0.0;
  EXPECT(sidiff_potential_osc_chi(p, &osc) == SIDIFF_OK);
  EXPECT(fabs(osc - 1.7335392099559366) < 1e-7);
  sidiff_potential_destroy(p);
}

static void test_schedule_and_gibbs(void) {
  sidiff_schedule* s = NULL;
  EXPECT(sidiff_schedule_logarithmic(12.5, exp(1.0), &s) == SIDIFF_OK);
  double eps2 = 0.0, a = 0.0, u = 0.0, t = 0.0;
  EXPECT(sidiff_annealing_state(s, 1.0, 100.0, &eps2, &a) == SIDIFF_OK);
  EXPECT(fabs(eps2 - 2.2305583255219847) < 1e-11);
  EXPECT(fabs(a / 120.95000950094703 - 1.0) < 1e-10);
  EXPECT(sidiff_schedule_G(s, 3.0, &u) == SIDIFF_OK);
  EXPECT(sidiff_schedule_g_inverse(s, u, &t) == SIDIFF_OK);
  EXPECT(fabs(t - 3.0) < 1e-9);
  sidiff_schedule_destroy(s);
  EXPECT(sidiff_schedule_logarithmic(1.0, 1.0, &s) == SIDIFF_E_CONFIG);

  sidiff_potential* p = NULL;
  sidiff_potential_create("double_well", NULL, NULL, 0, &p);
  sidiff_gibbs* m = NULL;
  EXPECT(sidiff_gibbs_create(p, 0.05, INFINITY, &m) == SIDIFF_OK);
  /* The measure owns a copy of the potential. */
  sidiff_potential_destroy(p);
  double logz = 0.0, mass = 0.0;
  EXPECT(sidiff_gibbs_log_normalizer(m, &logz) == SIDIFF_OK);
  EXPECT(fabs(exp(logz) / 0.2816011608980407 - 1.0) < 1e-10);
  EXPECT(sidiff_gibbs_mass(m, 0.0, 5.0, &mass) == SIDIFF_OK);
  EXPECT(fabs(mass - 0.5) < 1e-9);
  double a1[4], a2[4];
  EXPECT(sidiff_gibbs_sample(m, 9, 0, 4, a1) == SIDIFF_OK);
  EXPECT(sidiff_gibbs_sample(m, 9, 0, 4, a2) == SIDIFF_OK);
  EXPECT(memcmp(a1, a2, sizeof a1) == 0);
  sidiff_gibbs_destroy(m);
}

static void test_landscape(void) {
  sidiff_potential* p = NULL;
  sidiff_potential_create("double_well", NULL, NULL, 0, &p);
  double m = 0.0, gap = 0.0;
  EXPECT(sidiff_maximal_height(p, INFINITY, 1e-3, &m) == SIDIFF_OK);
  EXPECT(fabs(m - 1.0) < 0.01);
  sidiff_potential_destroy(p);
  sidiff_potential_create("quadratic", NULL, NULL, 0, &p);
  EXPECT(sidiff_spectral_gap(p, 1.0, INFINITY, 1e-3, &gap) == SIDIFF_OK);
  EXPECT(fabs(gap - 1.0) < 0.01);
  sidiff_potential_destroy(p);
}

static void test_text_outputs(void) {
  size_t size = 0;
  EXPECT(sidiff_catalog_json(NULL, 0, &size) == SIDIFF_OK);
  EXPECT(size > 10);
  char small[4];
  EXPECT(sidiff_catalog_json(small, sizeof small, &size) == SIDIFF_E_BUFFER_TOO_SMALL);
  char* buf = malloc(size);
  EXPECT(sidiff_catalog_json(buf, size, &size) == SIDIFF_OK);
  EXPECT(strstr(buf, "\"double_well\"") != NULL);
  EXPECT(strstr(buf, "\"logarithmic\"") != NULL);
  free(buf);
  EXPECT(strlen(sidiff_version()) > 0);
}

static void test_config_and_run(void) {
  sidiff_config* bad = NULL;
  EXPECT(sidiff_config_parse("{\"experiment\": \"anneal_to_pi0\", \"bogus\": 1}", &bad) == SIDIFF_OK);
  EXPECT(!sidiff_config_valid(bad));
  EXPECT(sidiff_config_issue_count(bad) >= 3);
  int severity = -1;
  const char* key = NULL;
  const char* message = NULL;
  EXPECT(sidiff_config_issue(bad, 0, &severity, &key, &message) == SIDIFF_OK);
  EXPECT(severity == 0 && message != NULL);
  EXPECT(sidiff_config_issue(bad, 1000, &severity, &key, &message) == SIDIFF_E_INVALID_ARGUMENT);
  sidiff_result* none = NULL;
  EXPECT(sidiff_run(bad, &none) == SIDIFF_E_CONFIG);
  sidiff_config_destroy(bad);

  sidiff_config* cfg = NULL;
  EXPECT(sidiff_config_load(SIDIFF_CONFIGS_DIR "/landscape_spectrum.json", &cfg) == SIDIFF_OK);
  EXPECT(sidiff_config_valid(cfg));
  EXPECT(sidiff_config_set_output_dir(cfg, "c_api_landscape") == SIDIFF_OK);
  EXPECT(sidiff_config_set_workers(cfg, 1) == SIDIFF_OK);
  sidiff_result* r = NULL;
  EXPECT(sidiff_run(cfg, &r) == SIDIFF_OK);
  EXPECT(sidiff_result_all_pass(r));
  EXPECT(sidiff_result_criterion_count(r) == 7);
  const char* id = NULL;
  int pass = 0;
  EXPECT(sidiff_result_criterion(r, 0, &id, &pass) == SIDIFF_OK);
  EXPECT(strcmp(id, "maximal_height_matches_oracle") == 0 && pass == 1);
  EXPECT(strstr(sidiff_result_verdict_json(r), "\"config_hash\"") != NULL);
  sidiff_result_destroy(r);
  sidiff_config_destroy(cfg);
}

int main(void) {
  test_errors();
  test_potential();
  test_schedule_and_gibbs();
  test_landscape();
  test_text_outputs();
  test_config_and_run();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("c api: all checks passed\n");
  return 0;
}
