#ifndef PLANAR_AR_H
#define PLANAR_AR_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PlanarArStatus {
  PLANAR_AR_STATUS_OK = 0,
  PLANAR_AR_STATUS_NULL_POINTER = 1,
  PLANAR_AR_STATUS_PARAMETER_DOMAIN = 2,
  PLANAR_AR_STATUS_NONSTATIONARY = 3,
  PLANAR_AR_STATUS_NON_CAUSAL = 4,
  PLANAR_AR_STATUS_RANGE = 5,
  PLANAR_AR_STATUS_ILL_CONDITIONED = 6,
  PLANAR_AR_STATUS_INCONSISTENT_ACF = 7,
  PLANAR_AR_STATUS_TRUNCATION = 8,
  PLANAR_AR_STATUS_INPUT = 9,
  PLANAR_AR_STATUS_INTERNAL = 10,
  PLANAR_AR_STATUS_PANIC = 11,
} PlanarArStatus;

typedef enum PlanarArMethod {
  PLANAR_AR_METHOD_CAUSAL_MA = 0,
  PLANAR_AR_METHOD_BOUNDARY_RECURSION = 1,
} PlanarArMethod;

// Opaque autocovariance grid.
typedef struct PlanarArAcfGrid PlanarArAcfGrid;

// Opaque simulated field.
typedef struct PlanarArField PlanarArField;

// Opaque table of moving-average coefficients.
typedef struct PlanarArPsiTable PlanarArPsiTable;

typedef struct PlanarArParams {
  double a;
  double b;
  double c;
  double sigma2;
} PlanarArParams;

typedef struct PlanarArConditions {
  double f1;
  double f2;
  double f3;
  double f4;
  double d;
  bool stationary;
  bool causal;
  bool pnd_sufficient;
  bool near_boundary;
} PlanarArConditions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *planar_ar_last_error(void);

const char *planar_ar_version(void);

enum PlanarArStatus planar_ar_check_conditions(const struct PlanarArParams *params,
                                               struct PlanarArConditions *result);

// Applies row `m` (1 to 4) of the parameter correspondence table.
enum PlanarArStatus planar_ar_transform(const struct PlanarArParams *params,
                                        uint8_t m,
                                        struct PlanarArParams *result);

// Causal representative and the index (1 to 4) of the transform reaching it.
enum PlanarArStatus planar_ar_canonical_causal(const struct PlanarArParams *params,
                                               struct PlanarArParams *result,
                                               uint8_t *transform_index);

// Autocovariance at one lag.
enum PlanarArStatus planar_ar_acf(const struct PlanarArParams *params,
                                  int64_t h1,
                                  int64_t h2,
                                  double *value);

// Autocovariance at one lag by trapezoid quadrature of the spectral density.
enum PlanarArStatus planar_ar_acf_quadrature(const struct PlanarArParams *params,
                                             int64_t h1,
                                             int64_t h2,
                                             size_t nodes_per_axis,
                                             double *value);

enum PlanarArStatus planar_ar_acf_grid_new(const struct PlanarArParams *params,
                                           int64_t h1_min,
                                           int64_t h1_max,
                                           int64_t h2_min,
                                           int64_t h2_max,
                                           struct PlanarArAcfGrid **grid);

enum PlanarArStatus planar_ar_acf_grid_get(const struct PlanarArAcfGrid *grid,
                                           int64_t h1,
                                           int64_t h2,
                                           double *value);

// Values in row-major order (`h1` outer, `h2` inner); `len` receives the count.
// The pointer lives as long as the grid.
const double *planar_ar_acf_grid_values(const struct PlanarArAcfGrid *grid, size_t *len);

void planar_ar_acf_grid_free(struct PlanarArAcfGrid *grid);

enum PlanarArStatus planar_ar_psi_table_new(const struct PlanarArParams *params,
                                            size_t kmax,
                                            size_t lmax,
                                            struct PlanarArPsiTable **table);

// Coefficient `psi(k, l)`; zero outside the table.
double planar_ar_psi_table_get(const struct PlanarArPsiTable *table, int64_t k, int64_t l);

// Estimated absolute mass of the coefficients outside the table.
double planar_ar_psi_table_tail(const struct PlanarArPsiTable *table);

void planar_ar_psi_table_free(struct PlanarArPsiTable *table);

// Gaussian-noise simulation with default truncation settings.
enum PlanarArStatus planar_ar_simulate(const struct PlanarArParams *params,
                                       size_t n_rows,
                                       size_t n_cols,
                                       uint64_t seed,
                                       enum PlanarArMethod method,
                                       struct PlanarArField **field);

enum PlanarArStatus planar_ar_field_dims(const struct PlanarArField *field,
                                         size_t *n_rows,
                                         size_t *n_cols);

// Row-major cell values; the pointer lives as long as the field.
const double *planar_ar_field_values(const struct PlanarArField *field);

void planar_ar_field_free(struct PlanarArField *field);

// Parameters from the autocovariances at lags (0,0), (1,0), (0,1), (1,1).
enum PlanarArStatus planar_ar_recover_params(double g00,
                                             double g10,
                                             double g01,
                                             double g11,
                                             struct PlanarArParams *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLANAR_AR_H */
