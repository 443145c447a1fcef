#include <math.h>
#include <stdio.h>
#include <string.h>

#include "bci.h"

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,     \
              __LINE__, #cond);                                  \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  const double pi = 3.14159265358979323846;
  BciInstance *inst = NULL;
  BciComplex alpha = {2.0, 0.0};
  BciComplex beta = {0.5, 0.0};
  CHECK(bci_instance_new(alpha, beta, pi, 1e-8, 0.02, &inst) == BCI_STATUS_OK);

  BciResult theorem, quad, rational;
  CHECK(bci_eval_theorem(inst, &theorem) == BCI_STATUS_OK);
  CHECK(bci_eval_quadrature(inst, &quad) == BCI_STATUS_OK);
  CHECK(bci_eval_rational(inst, 1, 2, &rational) == BCI_STATUS_OK);
  CHECK(hypot(theorem.value.re - quad.value.re, theorem.value.im - quad.value.im) < 1e-9);
  CHECK(hypot(theorem.value.re - rational.value.re, theorem.value.im - rational.value.im) < 1e-12);

  BciResult series;
  CHECK(bci_eval_series(inst, 0, &series) == BCI_STATUS_NOT_APPLICABLE);
  CHECK(strcmp(bci_status_name(BCI_STATUS_NOT_APPLICABLE), "NotApplicable") == 0);
  CHECK(bci_last_error_message() != NULL);

  char *json = NULL;
  CHECK(bci_evaluate_json(inst, &json) == BCI_STATUS_OK);
  CHECK(strstr(json, "\"verdict\":\"Agree\"") != NULL);
  bci_string_free(json);
  bci_instance_free(inst);

  BciInstance *bad = NULL;
  BciComplex on_circle = {0.0, 1.0};
  CHECK(bci_instance_new(on_circle, beta, pi, 1e-8, 0.02, &bad) == BCI_STATUS_ALPHA_ON_CIRCLE);
  CHECK(bad == NULL);

  printf("%.17g %.17g\n", theorem.value.re, theorem.value.im);
  return 0;
}
