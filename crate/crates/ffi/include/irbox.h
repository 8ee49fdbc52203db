#ifndef IRBOX_H
#define IRBOX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define IRBOX_METHOD_EMPIRICAL 0

#define IRBOX_METHOD_GEOMETRIC 1

typedef enum IrboxStatus {
  IRBOX_STATUS_OK = 0,
  IRBOX_STATUS_NULL_POINTER = 1,
  IRBOX_STATUS_INVALID_ARGUMENT = 2,
  IRBOX_STATUS_VALIDATION = 3,
  IRBOX_STATUS_LIMIT = 4,
  IRBOX_STATUS_PANIC = 5,
} IrboxStatus;

/**
 * Built gasket.
 */
typedef struct IrboxGasket IrboxGasket;

/**
 * Validated balance-sheet panel.
 */
typedef struct IrboxPanel IrboxPanel;

/**
 * Index set of one record. `gear` is meaningful only when `gear_defined`.
 */
typedef struct IrboxIndices {
  double tr;
  double nr;
  double aco;
  double firi;
  double firi_h;
  double firi_v;
  double gear;
  bool gear_defined;
  double pi;
} IrboxIndices;

typedef struct IrboxEconomyParams {
  double r;
  double z;
  double tau;
  double p;
  double pi_store;
} IrboxEconomyParams;

/**
 * `bound`: 0 interior, 1 at zero, 2 at the debt limit.
 */
typedef struct IrboxFirmDecision {
  double y;
  double objective;
  double pi_store;
  double unconstrained_y;
  double y_max;
  uint32_t bound;
  bool risk_free_debt;
} IrboxFirmDecision;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *irbox_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void irbox_string_free(char *s);

/**
 * Risk indices of one `(d, e)` pair, with `a = d + e`.
 */
enum IrboxStatus irbox_compute_indices(double d, double e, struct IrboxIndices *result);

/**
 * `(a − (e − d)) / a`.
 */
enum IrboxStatus irbox_pi_fraction(double a, double d, double e, double *result);

/**
 * Slopes `d/e` of the two rays where FIRI equals `c`, for `c` in `(0, 1]`.
 */
enum IrboxStatus irbox_firi_ray_slopes(double c, double *low, double *high);

/**
 * Builds the gasket at `depth`, refusing depths above `depth_cap`.
 */
enum IrboxStatus irbox_gasket_new(uint32_t depth, uint32_t depth_cap, struct IrboxGasket **result);

/**
 * # Safety
 * `gasket` must be null or a live handle from [`irbox_gasket_new`].
 */
void irbox_gasket_free(struct IrboxGasket *gasket);

enum IrboxStatus irbox_gasket_depth(const struct IrboxGasket *gasket, uint32_t *result);

/**
 * Number of remaining triangles.
 */
enum IrboxStatus irbox_gasket_triangle_count(const struct IrboxGasket *gasket, uint64_t *result);

/**
 * Exact removed area as `"num/den"`; free with [`irbox_string_free`].
 */
enum IrboxStatus irbox_gasket_area_removed(const struct IrboxGasket *gasket, char **result);

/**
 * Exact perimeter in units of `2 + sqrt(2)`, as `"num/den"`.
 */
enum IrboxStatus irbox_gasket_perimeter_coefficient(const struct IrboxGasket *gasket,
                                                    char **result);

/**
 * Occupied cells of the `2^m` grid.
 */
enum IrboxStatus irbox_gasket_box_count(const struct IrboxGasket *gasket,
                                        uint32_t m,
                                        bool closed_cells,
                                        uint64_t *result);

/**
 * Box-counting dimension over scales `m_min..=m_max`.
 */
enum IrboxStatus irbox_gasket_fit_dimension(const struct IrboxGasket *gasket,
                                            uint32_t m_min,
                                            uint32_t m_max,
                                            bool closed_cells,
                                            double *dimension,
                                            double *fit_quality);

/**
 * Parses and validates a balance-sheet CSV held in memory. The panel
 * axis is inferred from the records.
 *
 * # Safety
 * `csv` must be null or a NUL-terminated string.
 */
enum IrboxStatus irbox_panel_from_csv(const char *csv,
                                      bool distress_mode,
                                      double tolerance,
                                      struct IrboxPanel **result);

/**
 * # Safety
 * `panel` must be null or a live handle from [`irbox_panel_from_csv`].
 */
void irbox_panel_free(struct IrboxPanel *panel);

enum IrboxStatus irbox_panel_len(const struct IrboxPanel *panel, size_t *result);

/**
 * Indices of the record at `index`, in panel order.
 */
enum IrboxStatus irbox_panel_indices(const struct IrboxPanel *panel,
                                     size_t index,
                                     struct IrboxIndices *result);

/**
 * `P(e <= 0 | d > 0)` by [`IRBOX_METHOD_EMPIRICAL`] or
 * [`IRBOX_METHOD_GEOMETRIC`].
 */
enum IrboxStatus irbox_panel_probability(const struct IrboxPanel *panel,
                                         uint32_t method,
                                         double *result);

/**
 * Optimal risky position for one firm.
 *
 * # Safety
 * `params` must be null or point to a readable parameter block.
 */
enum IrboxStatus irbox_optimize_firm(double d,
                                     double e,
                                     double x,
                                     const struct IrboxEconomyParams *params,
                                     struct IrboxFirmDecision *result);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* IRBOX_H */
