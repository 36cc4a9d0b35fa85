#ifndef SEMP_H
#define SEMP_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SempStatus {
  SEMP_STATUS_OK = 0,
  SEMP_STATUS_NULL_POINTER = 1,
  SEMP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Calls made out of order, e.g. observing without a pending query.
   */
  SEMP_STATUS_PROTOCOL_VIOLATION = 3,
  /**
   * Failure while computing, e.g. a batch with zero measured throughput.
   */
  SEMP_STATUS_RUNTIME = 4,
  SEMP_STATUS_PANIC = 5,
} SempStatus;

typedef enum SempTruncationMode {
  SEMP_TRUNCATION_MODE_OFF = 0,
  SEMP_TRUNCATION_MODE_LIPSCHITZ = 1,
  SEMP_TRUNCATION_MODE_RELATIVE = 2,
} SempTruncationMode;

typedef enum SempRegime {
  SEMP_REGIME_GENERAL = 0,
  SEMP_REGIME_SWITCHING_TOTAL = 1,
  SEMP_REGIME_SWITCHING_INTERVAL = 2,
  SEMP_REGIME_SLOW = 3,
} SempRegime;

typedef struct SempCoexistence SempCoexistence;

typedef struct SempLearner SempLearner;

typedef struct SempPacketSim SempPacketSim;

/**
 * Learner settings. With `constant` set, `constant_eta` and
 * `constant_delta` replace the power schedules.
 */
typedef struct SempLearnerConfig {
  double lower;
  double upper;
  double omega;
  double exponent;
  double step_scale;
  double step_exponent;
  bool constant;
  double constant_eta;
  double constant_delta;
  enum SempTruncationMode truncation;
  double truncation_factor;
  /**
   * Only read in `Lipschitz` mode.
   */
  double truncation_bound;
  bool has_initial;
  double initial;
  uint64_t seed;
} SempLearnerConfig;

/**
 * Outcome of a completed iteration. `sign` is +1 or -1.
 */
typedef struct SempStepReport {
  uint64_t k;
  int32_t sign;
  double delta;
  double eta;
  double center;
  double gplus;
  double gminus;
  double raw_gradient;
  double gradient;
  bool truncated;
  double next_center;
} SempStepReport;

/**
 * Scenario constants. `collision_prob` is used only when
 * `has_collision_prob` is set.
 */
typedef struct SempParameterPack {
  double on_time;
  double lte_rate;
  double subframe;
  double tau;
  double slot_time;
  double phy_rate;
  double mac_overhead;
  uint32_t packets_per_frame;
  uint32_t packet_bytes;
  bool has_collision_prob;
  double collision_prob;
} SempParameterPack;

typedef struct SempOptimum {
  double ztilde;
  /**
   * Mean off time in seconds.
   */
  double toff;
  bool interior;
} SempOptimum;

typedef struct SempBatchReport {
  double lte_throughput;
  double mean_wifi_throughput;
  double elapsed;
  uint64_t cycles;
  uint64_t successes;
  uint64_t collisions;
  uint64_t truncated_frames;
  uint64_t lost_subframes;
  /**
   * Cost of the measured throughputs; NaN if some throughput was zero.
   */
  double noisy_cost;
} SempBatchReport;

typedef struct SempTuning {
  double eta;
  double delta;
  double bound;
} SempTuning;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if it succeeded.
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *semp_last_error_message(void);

/**
 * Static, nul-terminated name of a status code.
 */
const char *semp_status_name(enum SempStatus status);

/**
 * Fills `out` with the default settings on the default decision interval.
 */
enum SempStatus semp_learner_config_default(struct SempLearnerConfig *out);

enum SempStatus semp_learner_new(const struct SempLearnerConfig *config, struct SempLearner **out);

/**
 * Releases a learner. Null is ignored.
 */
void semp_learner_free(struct SempLearner *learner);

/**
 * Next point to play and its one-based round.
 */
enum SempStatus semp_learner_next_query(struct SempLearner *learner,
                                        uint64_t *round,
                                        double *point);

/**
 * Feeds the cost of the last query. `completed` is set when this closes an
 * iteration, in which case `report` (if not null) is filled.
 */
enum SempStatus semp_learner_observe(struct SempLearner *learner,
                                     double cost,
                                     bool *completed,
                                     struct SempStepReport *report);

enum SempStatus semp_learner_center(const struct SempLearner *learner, double *out);

enum SempStatus semp_parameter_pack_default(struct SempParameterPack *out);

/**
 * Model for `stations` identical saturated stations.
 */
enum SempStatus semp_coexistence_new(const struct SempParameterPack *pack,
                                     uint32_t stations,
                                     struct SempCoexistence **out);

void semp_coexistence_free(struct SempCoexistence *model);

/**
 * Cost and its derivative at `ztilde`. Either output may be null.
 */
enum SempStatus semp_coexistence_cost(const struct SempCoexistence *model,
                                      double ztilde,
                                      double *cost,
                                      double *gradient);

/**
 * LTE and per-station WiFi throughput (b/s) at mean off time `toff`.
 */
enum SempStatus semp_coexistence_throughputs(const struct SempCoexistence *model,
                                             double toff,
                                             double *lte,
                                             double *wifi);

/**
 * Cost minimiser over `[lower, upper]`.
 */
enum SempStatus semp_coexistence_optimum(const struct SempCoexistence *model,
                                         double lower,
                                         double upper,
                                         struct SempOptimum *out);

/**
 * Simulator for `stations` stations with batches of `batch_duration`
 * seconds and off times uniform within `spread` of their mean.
 */
enum SempStatus semp_packet_sim_new(const struct SempParameterPack *pack,
                                    uint32_t stations,
                                    double batch_duration,
                                    double spread,
                                    uint64_t seed,
                                    struct SempPacketSim **out);

void semp_packet_sim_free(struct SempPacketSim *sim);

enum SempStatus semp_packet_sim_set_stations(struct SempPacketSim *sim, uint32_t stations);

/**
 * Runs one batch at mean off time `toff` seconds.
 */
enum SempStatus semp_packet_sim_run_batch(struct SempPacketSim *sim,
                                          double toff,
                                          struct SempBatchReport *out);

/**
 * Interval regret bound for constant `eta` and `delta` over `span = r - s`
 * rounds with total deviation `total_deviation`.
 */
enum SempStatus semp_theorem1_bound(double diameter,
                                    double lipschitz,
                                    double eta,
                                    double delta,
                                    double span,
                                    double total_deviation,
                                    double *out);

/**
 * Tuned parameters and bound for horizon `horizon`. `switches` is read for
 * `SwitchingTotal`, `alpha` for `Slow`.
 */
enum SempStatus semp_corollary_bound(enum SempRegime regime,
                                     uint32_t switches,
                                     double alpha,
                                     double horizon,
                                     double diameter,
                                     double lipschitz,
                                     double range,
                                     struct SempTuning *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMP_H */
