#ifndef COVERT_NAV_H
#define COVERT_NAV_H

/* Generated by cbindgen from the covert-nav-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CnStatus {
  CN_STATUS_OK = 0,
  CN_STATUS_NULL_POINTER = 1,
  CN_STATUS_INVALID_ARGUMENT = 2,
  CN_STATUS_BUFFER_TOO_SMALL = 3,
  CN_STATUS_OUT_OF_BOUNDS = 4,
  CN_STATUS_INVALID_SCENARIO = 5,
  CN_STATUS_INVALID_CONFIG = 6,
  CN_STATUS_INFEASIBLE = 7,
  CN_STATUS_IO = 8,
  CN_STATUS_PANIC = 9,
  CN_STATUS_INTERNAL = 10,
} CnStatus;

typedef enum CnEvent {
  CN_EVENT_NONE = 0,
  CN_EVENT_COLLISION = 1,
  CN_EVENT_GOAL_REACHED = 2,
} CnEvent;

typedef struct CnEnv CnEnv;

typedef struct CnPolicy CnPolicy;

typedef struct CnScenario CnScenario;

/**
 * Inputs for one reward evaluation. `elevation_history` points to
 * `history_len` heights, most recent first. Use `INFINITY` for `d_cover`
 * when no cover is known.
 */
typedef struct CnStepContext {
  double d_prev;
  double d_cur;
  double theta_prev;
  double theta_cur;
  double roll;
  double pitch;
  const double *elevation_history;
  size_t history_len;
  double h_cur;
  double d_cover;
} CnStepContext;

typedef struct CnReward {
  double r_goal;
  double r_dir;
  double r_stab;
  double r_elev;
  double r_cover;
  double total;
} CnReward;

/**
 * One object detection. `class_name` is a NUL-terminated label such as "Tree".
 */
typedef struct CnDetection {
  const char *class_name;
  double confidence;
  int64_t object_id;
  double x_pos;
  double y_pos;
  double z_pos;
} CnDetection;

typedef struct CnCoverVerdict {
  bool is_cover;
  /**
   * `INFINITY` when no object qualifies.
   */
  double cover_distance;
  bool has_nearest;
  int64_t nearest_object_id;
} CnCoverVerdict;

typedef struct CnStepResult {
  enum CnEvent event;
  bool done;
  bool truncated;
  struct CnReward reward;
  bool is_cover;
  double cover_distance;
} CnStepResult;

typedef struct CnRobotState {
  double x;
  double y;
  double z;
  double heading;
  double v;
  double omega;
  double roll;
  double pitch;
} CnRobotState;

typedef struct CnCommand {
  double v;
  double omega;
} CnCommand;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cn_last_error(void);

/**
 * Length of the observation vector produced by environments with default settings.
 */
size_t cn_observation_len(void);

/**
 * Reward terms for one step under the default weights.
 */
enum CnStatus cn_reward(const struct CnStepContext *ctx, struct CnReward *out);

/**
 * Nearest qualifying cover among `n` detections, measured from `(rx, ry, rz)`.
 */
enum CnStatus cn_detect_cover(const struct CnDetection *detections,
                              size_t n,
                              double rx,
                              double ry,
                              double rz,
                              struct CnCoverVerdict *out);

/**
 * Generates a scenario. `kind` is one of "normal", "low", "low-high",
 * "forest" or "corridor".
 */
enum CnStatus cn_scenario_generate(const char *kind, uint64_t seed, struct CnScenario **out);

/**
 * Loads a scenario JSON file.
 */
enum CnStatus cn_scenario_load(const char *path, struct CnScenario **out);

enum CnStatus cn_scenario_save(const struct CnScenario *scenario, const char *path);

size_t cn_scenario_object_count(const struct CnScenario *scenario);

/**
 * Terrain height at `(x, y)`.
 */
enum CnStatus cn_scenario_height(const struct CnScenario *scenario,
                                 double x,
                                 double y,
                                 double *out);

void cn_scenario_free(struct CnScenario *scenario);

/**
 * Creates an environment with default settings. The scenario is copied and
 * may be freed afterwards.
 */
enum CnStatus cn_env_new(const struct CnScenario *scenario, uint64_t seed, struct CnEnv **out);

void cn_env_free(struct CnEnv *env);

/**
 * Starts a new episode with a random spawn and goal. When `obs` is not NULL
 * the first observation is written to it.
 */
enum CnStatus cn_env_reset(struct CnEnv *env, double *obs, size_t obs_len);

/**
 * Starts a new episode from a fixed pose and goal.
 */
enum CnStatus cn_env_reset_to(struct CnEnv *env,
                              double x,
                              double y,
                              double heading,
                              double goal_x,
                              double goal_y,
                              double *obs,
                              size_t obs_len);

/**
 * Applies `(v, omega)` for one control interval.
 */
enum CnStatus cn_env_step(struct CnEnv *env,
                          double v,
                          double omega,
                          struct CnStepResult *out,
                          double *obs,
                          size_t obs_len);

enum CnStatus cn_env_robot(const struct CnEnv *env, struct CnRobotState *out);

enum CnStatus cn_env_goal(const struct CnEnv *env, double *x, double *y);

/**
 * Best admissible command from the current dynamic window.
 */
enum CnStatus cn_env_dwa_command(const struct CnEnv *env, struct CnCommand *out);

/**
 * Creates a policy: "dwa", "random", "stand-still", "straight", or a path to
 * a checkpoint file. `seed` drives the policy's own randomness.
 */
enum CnStatus cn_policy_new(const char *name, uint64_t seed, struct CnPolicy **out);

/**
 * Command the policy chooses for the environment's current state.
 */
enum CnStatus cn_policy_command(struct CnPolicy *policy,
                                const struct CnEnv *env,
                                struct CnCommand *out);

void cn_policy_free(struct CnPolicy *policy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVERT_NAV_H */
