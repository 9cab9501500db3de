/*
 * Copyright 2026 The mdeval Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Compiles the public header as C and makes one round trip through it. */

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "mde/mde.h"

int main(void) {
  const double logits[] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  mde_store* store = NULL;
  double value = 0.0;
  if (mde_store_create(3, 2, logits, NULL, "c", &store) != MDE_OK) return 1;
  if (mde_compute_measure("mde", store, NULL, 1.0, &value, NULL) != MDE_OK) return 1;
  mde_store_free(store);
  if (fabs(value - log(3.0)) > 1e-12) {
    fprintf(stderr, "mde = %.17g\n", value);
    return 1;
  }
  return strcmp(mde_status_name(MDE_ERR_MISSING_INPUT), "missing_input") == 0 ? 0 : 1;
}
