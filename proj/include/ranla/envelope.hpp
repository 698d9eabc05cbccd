#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranla/qnet.hpp"
#include "ranla/transition.hpp"

namespace ranla {

struct TrainingError : std::runtime_error {
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Envelope backup on explicit Q tables, used both as the production code
 * path (fed with network outputs) and as an enumeration oracle in tests.
 *
 * q_select and q_eval hold one num_actions x num_objectives matrix per
 * candidate preference. The backup scans every (allowed action, candidate)
 * pair, keeps the pair maximizing omega_b . q_select, and bootstraps the
 * full vector value from q_eval at that pair:
 *
 *   y = reward + gamma * q_eval[c*].row(a*)    (y = reward when done)
 *
 * Ties break toward the earlier candidate, then the lower action index.
 */
Eigen::Vector2d envelope_backup(const Eigen::Vector2d& reward, bool done, double gamma,
                                const PreferenceVector& omega_b,
                                const std::vector<Eigen::MatrixXd>& q_select,
                                const std::vector<Eigen::MatrixXd>& q_eval,
                                const ActionMask& next_mask);

/**
 * Vector TD targets for a batch. The candidate set for each transition is
 * the shared preference samples plus that transition's own behavior
 * preference. select_net picks (a*, omega*); eval_net provides the
 * bootstrapped value. Passing the same network twice gives the plain
 * single-network target.
 */
std::vector<Eigen::Vector2d> envelope_targets(const std::vector<const Transition*>& batch,
                                              const QNetwork& select_net, const QNetwork& eval_net,
                                              double gamma,
                                              const std::vector<PreferenceVector>& omega_samples);

struct TdResult {
  double loss = 0.0;
  std::vector<double> priorities;
};

/**
 * One optimization step on the online network:
 *
 *   loss = (1/B) * sum_i w_i * sum_j huber(y_ij - Q_j(s_i, a_i, omega_i))
 *
 * with envelope targets y (online selects, target evaluates) and a Huber
 * error that is quadratic within one unit and linear beyond — TD errors are
 * O(1) at the consistent fixed point, so larger ones are treated as
 * outliers rather than allowed to dominate the update. The applied gradient
 * is norm-clipped. Returns the loss and fresh per-transition priorities
 * |omega_i . (y_i - Q_i)| + 1e-3 (raw error, unclipped). Throws
 * TrainingError if the loss is not finite.
 *
 * target_clip > 0 clamps every target component to [-target_clip,
 * target_clip] before the regression; pick it at or above
 * max-|reward| / (1 - gamma) so only infeasible bootstrapped values are
 * touched.
 */
TdResult td_step(QNetwork& online, const QNetwork& target, AdamOptimizer& opt,
                 const std::vector<const Transition*>& batch, const Eigen::VectorXd& weights,
                 const std::vector<PreferenceVector>& omega_samples, double gamma,
                 double target_clip = 0.0);

}  // namespace ranla
