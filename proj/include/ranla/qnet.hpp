#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ranla/actions.hpp"
#include "ranla/features.hpp"
#include "ranla/preference.hpp"
#include "ranla/rng.hpp"

namespace ranla {

/**
 * Architecture of the multi-objective Q network.
 *
 * Input is the state vector concatenated with the preference vector;
 * output is one Q estimate per (action, objective) pair, flattened as
 * index = action * num_objectives + objective.
 */
struct QNetConfig {
  int state_dim = kStateDim;
  int num_actions = kNumActions;
  int num_objectives = kNumObjectives;
  int hidden = 128;

  int input_dim() const { return state_dim + num_objectives; }
  int output_dim() const { return num_actions * num_objectives; }
  bool operator==(const QNetConfig&) const = default;
};

/**
 * Fully connected ReLU MLP: input -> hidden -> hidden -> output, double
 * precision throughout. Parameters live in one flat vector (layout:
 * W1 col-major, b1, W2, b2, W3, b3) so the optimizer, snapshot publishing
 * and checkpointing can treat the network as a single array.
 *
 * All math is plain single-threaded Eigen; identical inputs and parameters
 * give bit-identical outputs, which the deterministic training mode relies
 * on.
 */
class QNetwork {
 public:
  explicit QNetwork(const QNetConfig& cfg = {});

  const QNetConfig& config() const { return m_cfg; }
  int num_params() const { return static_cast<int>(m_params.size()); }
  const Eigen::VectorXd& params() const { return m_params; }
  Eigen::VectorXd& params() { return m_params; }

  // He-normal weight init (std = sqrt(2 / fan_in)), zero biases.
  void init_he(Rng& rng);

  // Columns of x are independent inputs; returns one output column each.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  struct ForwardCache {
    Eigen::MatrixXd x, z1, a1, z2, a2;
  };
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, ForwardCache& cache) const;

  // Gradient of a scalar loss wrt the flat parameter vector, given the
  // loss gradient wrt the network output (same shape as forward's result).
  Eigen::VectorXd backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_out) const;

  // Q(s, a, j | omega) as a num_actions x num_objectives matrix.
  Eigen::MatrixXd q_values(const StateVector& state, const PreferenceVector& omega) const;

  // Stacks state and preference into a single network input column.
  Eigen::VectorXd make_input(const StateVector& state, const PreferenceVector& omega) const;

 private:
  QNetConfig m_cfg;
  Eigen::VectorXd m_params;

  // Offsets of each block inside m_params.
  int m_w1 = 0, m_b1 = 0, m_w2 = 0, m_b2 = 0, m_w3 = 0, m_b3 = 0;
};

/** Adam with bias correction over a flat parameter vector. */
class AdamOptimizer {
 public:
  AdamOptimizer(int num_params, double lr = 1e-4, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

  double learning_rate() const { return m_lr; }
  void set_learning_rate(double lr) { m_lr = lr; }
  int64_t steps_taken() const { return m_t; }

  // Exposed so checkpoints can freeze and restore optimizer state.
  Eigen::VectorXd& first_moment() { return m_m; }
  Eigen::VectorXd& second_moment() { return m_v; }
  const Eigen::VectorXd& first_moment() const { return m_m; }
  const Eigen::VectorXd& second_moment() const { return m_v; }
  void set_steps_taken(int64_t t) { m_t = t; }

 private:
  double m_lr, m_beta1, m_beta2, m_eps;
  int64_t m_t = 0;
  Eigen::VectorXd m_m, m_v;
};

}  // namespace ranla
