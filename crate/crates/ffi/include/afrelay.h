#ifndef AFRELAY_H
#define AFRELAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum AfrStatus {
  AFR_STATUS_OK = 0,
  AFR_STATUS_INVALID_INPUT = 1,
  AFR_STATUS_NON_CONVERGENCE = 2,
  AFR_STATUS_NUMERICAL = 3,
  AFR_STATUS_NULL_POINTER = 4,
  AFR_STATUS_PANIC = 5,
} AfrStatus;

typedef enum AfrGainConvention {
  AFR_GAIN_CONVENTION_SELECTED_RELAY_MEANS = 0,
  AFR_GAIN_CONVENTION_PER_RELAY_MEANS = 1,
} AfrGainConvention;

typedef enum AfrModulationKind {
  AFR_MODULATION_KIND_COHERENT = 0,
  AFR_MODULATION_KIND_NON_COHERENT = 1,
} AfrModulationKind;

typedef enum AfrEvalPath {
  AFR_EVAL_PATH_CLOSED = 0,
  AFR_EVAL_PATH_QUADRATURE = 1,
} AfrEvalPath;

/**
 * Opaque analytic model.
 */
typedef struct AfrModel AfrModel;

/**
 * Scenario; field meanings as in the Rust `SystemConfig`.
 */
typedef struct AfrConfig {
  uint32_t num_relays;
  double rho1;
  double rho2;
  double d1;
  double pathloss_exp;
  double eta1_db;
  double eta2_db;
  double rate;
  double noise_power;
  enum AfrGainConvention gain_convention;
} AfrConfig;

typedef struct AfrDerived {
  double sigma1;
  double sigma2;
  double eta1;
  double eta2;
  double c;
  double psi;
} AfrDerived;

/**
 * Monte-Carlo estimates with their standard errors.
 */
typedef struct AfrMcResult {
  double outage;
  double outage_se;
  double ser;
  double ser_se;
  double mgf;
  double mgf_se;
  uint64_t num_trials;
} AfrMcResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Fills `out` with the default scenario (2 relays, correlation 0.9, relay
 * midway, path-loss exponent 3, 15 dB on both hops, rate 1).
 */
enum AfrStatus afr_config_default(struct AfrConfig *out);

/**
 * Builds the analytic model at source 2. For source 1 pass the scenario with
 * `d1 -> 1 - d1` and `rho1 <-> rho2`.
 */
enum AfrStatus afr_model_new(const struct AfrConfig *config, struct AfrModel **out);

/**
 * Releases a model. Null is ignored.
 */
void afr_model_free(struct AfrModel *model);

enum AfrStatus afr_model_derived(const struct AfrModel *model, struct AfrDerived *out);

/**
 * CDF of the end-to-end SNR at `phi`.
 */
enum AfrStatus afr_model_cdf(const struct AfrModel *model, double phi, double *out);

/**
 * Outage probability at the scenario's target rate.
 */
enum AfrStatus afr_model_outage(const struct AfrModel *model, double *out);

/**
 * `E[exp(-s Y)]` (note the minus sign).
 */
enum AfrStatus afr_model_mgf(const struct AfrModel *model, double s, double *out);

/**
 * Average SER for a named preset: "bpsk", "bfsk", "dbpsk", "ncbfsk", "<M>pam".
 */
enum AfrStatus afr_model_ser(const struct AfrModel *model, const char *modulation, double *out);

/**
 * Average SER for conditional error rate `a Q(sqrt(b snr))` (coherent) or
 * `a exp(-b snr)` (non-coherent).
 */
enum AfrStatus afr_model_ser_custom(const struct AfrModel *model,
                                    enum AfrModulationKind kind,
                                    double a,
                                    double b,
                                    double *out);

/**
 * `c1 int_0^inf x^c2 exp(-c3 x) F(x) dx`.
 */
enum AfrStatus afr_model_s_integral(const struct AfrModel *model,
                                    double c1,
                                    double c2,
                                    double c3,
                                    enum AfrEvalPath path,
                                    double *out);

/**
 * Monte-Carlo outage, SER (named preset) and MGF at `mgf_s`, all from the
 * same `num_trials` trials. Results are identical for any thread count.
 */
enum AfrStatus afr_simulate(const struct AfrConfig *config,
                            uint64_t num_trials,
                            uint64_t seed,
                            const char *modulation,
                            double mgf_s,
                            struct AfrMcResult *out);

/**
 * Message of the last failure on this thread (empty if none).
 */
const char *afr_last_error_message(void);

/**
 * Library version, a static string.
 */
const char *afr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFRELAY_H */
