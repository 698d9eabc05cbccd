#include "ranla/envelope.hpp"

#include <algorithm>
#include <cmath>

namespace ranla {

namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

constexpr double kPriorityFloor = 1e-3;

// TD errors are O(1) once the value estimate is consistent (rewards are
// normalized per decision), so errors beyond this are treated as outliers:
// the loss switches from quadratic to linear there, which keeps a handful
// of stale or freakish samples from blowing up the update.
constexpr double kHuberDelta = 1.0;

// Hard cap on the global gradient norm per update, the second guard rail
// against runaway bootstrapped targets.
constexpr double kGradClipNorm = 10.0;

// Quadratic inside |d| <= kHuberDelta (matching plain squared error there),
// linear outside.
double huber_loss(double d) {
  const double a = std::abs(d);
  if (a <= kHuberDelta) return d * d;
  return 2.0 * kHuberDelta * a - kHuberDelta * kHuberDelta;
}

// d(huber_loss)/dd: 2d clamped to [-2*kHuberDelta, 2*kHuberDelta].
double huber_grad(double d) {
  return 2.0 * std::clamp(d, -kHuberDelta, kHuberDelta);
}

}  // namespace

Eigen::Vector2d envelope_backup(const Eigen::Vector2d& reward, bool done, double gamma,
                                const PreferenceVector& omega_b,
                                const std::vector<Eigen::MatrixXd>& q_select,
                                const std::vector<Eigen::MatrixXd>& q_eval,
                                const ActionMask& next_mask) {
  if (done) return reward;
  if (q_select.empty() || q_select.size() != q_eval.size())
    throw std::invalid_argument("envelope_backup: candidate table mismatch");
  if (next_mask.count_allowed() == 0)
    throw std::invalid_argument("envelope_backup: next mask allows no action");

  int best_a = -1;
  size_t best_c = 0;
  double best_value = 0.0;
  for (size_t c = 0; c < q_select.size(); ++c) {
    const MatrixXd& q = q_select[c];
    if (q.rows() != kNumActions || q.cols() != kNumObjectives)
      throw std::invalid_argument("envelope_backup: Q table shape mismatch");
    for (int a = 0; a < kNumActions; ++a) {
      if (!next_mask.allowed(a)) continue;
      double value = omega_b.dot(q.row(a));
      if (best_a < 0 || value > best_value) {
        best_a = a;
        best_c = c;
        best_value = value;
      }
    }
  }
  return reward + gamma * q_eval[best_c].row(best_a).transpose();
}

std::vector<Eigen::Vector2d> envelope_targets(const std::vector<const Transition*>& batch,
                                              const QNetwork& select_net, const QNetwork& eval_net,
                                              double gamma,
                                              const std::vector<PreferenceVector>& omega_samples) {
  const size_t b = batch.size();
  std::vector<Vector2d> targets(b);
  if (b == 0) return targets;

  const int m = kNumObjectives;
  const int in = select_net.config().input_dim();
  const size_t n_cand = omega_samples.size() + 1;  // shared samples + behavior preference

  // One forward pass over every (transition, candidate) pair.
  MatrixXd select_in(in, static_cast<Eigen::Index>(b * n_cand));
  for (size_t i = 0; i < b; ++i) {
    const Transition& t = *batch[i];
    for (size_t c = 0; c < n_cand; ++c) {
      const PreferenceVector& w = c < omega_samples.size() ? omega_samples[c] : t.omega_behavior;
      select_in.col(static_cast<Eigen::Index>(i * n_cand + c)) =
          select_net.make_input(t.next_state, w);
    }
  }
  MatrixXd select_out = select_net.forward(select_in);

  std::vector<int> best_a(b, 0);
  std::vector<size_t> best_c(b, 0);
  for (size_t i = 0; i < b; ++i) {
    const Transition& t = *batch[i];
    if (t.done) continue;
    if (t.next_mask.count_allowed() == 0)
      throw TrainingError("envelope_targets: transition next mask allows no action");
    int arg_a = -1;
    size_t arg_c = 0;
    double best_value = 0.0;
    for (size_t c = 0; c < n_cand; ++c) {
      const auto col = select_out.col(static_cast<Eigen::Index>(i * n_cand + c));
      for (int a = 0; a < kNumActions; ++a) {
        if (!t.next_mask.allowed(a)) continue;
        double value = 0.0;
        for (int j = 0; j < m; ++j) value += t.omega_behavior[j] * col[a * m + j];
        if (arg_a < 0 || value > best_value) {
          arg_a = a;
          arg_c = c;
          best_value = value;
        }
      }
    }
    best_a[i] = arg_a;
    best_c[i] = arg_c;
  }

  const bool same_net = &select_net == &eval_net;
  MatrixXd eval_out;
  if (!same_net) {
    MatrixXd eval_in(in, static_cast<Eigen::Index>(b));
    for (size_t i = 0; i < b; ++i) {
      const Transition& t = *batch[i];
      const PreferenceVector& w =
          best_c[i] < omega_samples.size() ? omega_samples[best_c[i]] : t.omega_behavior;
      eval_in.col(static_cast<Eigen::Index>(i)) = eval_net.make_input(t.next_state, w);
    }
    eval_out = eval_net.forward(eval_in);
  }

  for (size_t i = 0; i < b; ++i) {
    const Transition& t = *batch[i];
    if (t.done) {
      targets[i] = t.reward;
      continue;
    }
    Vector2d boot;
    for (int j = 0; j < m; ++j) {
      if (same_net) {
        boot[j] = select_out(best_a[i] * m + j, static_cast<Eigen::Index>(i * n_cand + best_c[i]));
      } else {
        boot[j] = eval_out(best_a[i] * m + j, static_cast<Eigen::Index>(i));
      }
    }
    targets[i] = t.reward + gamma * boot;
  }
  return targets;
}

TdResult td_step(QNetwork& online, const QNetwork& target, AdamOptimizer& opt,
                 const std::vector<const Transition*>& batch, const Eigen::VectorXd& weights,
                 const std::vector<PreferenceVector>& omega_samples, double gamma,
                 double target_clip) {
  const size_t b = batch.size();
  if (b == 0) throw std::invalid_argument("td_step: empty batch");
  if (weights.size() != static_cast<Eigen::Index>(b))
    throw std::invalid_argument("td_step: weight count mismatch");
  if (target_clip < 0.0) throw std::invalid_argument("td_step: negative target_clip");

  std::vector<Vector2d> targets = envelope_targets(batch, online, target, gamma, omega_samples);
  if (target_clip > 0.0)
    for (Vector2d& y : targets)
      y = y.cwiseMax(-target_clip).cwiseMin(target_clip);

  const int m = kNumObjectives;
  const int in = online.config().input_dim();
  MatrixXd x(in, static_cast<Eigen::Index>(b));
  for (size_t i = 0; i < b; ++i)
    x.col(static_cast<Eigen::Index>(i)) = online.make_input(batch[i]->state, batch[i]->omega_behavior);

  QNetwork::ForwardCache cache;
  MatrixXd q = online.forward(x, cache);

  TdResult result;
  result.priorities.resize(b);
  MatrixXd grad_out = MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (size_t i = 0; i < b; ++i) {
    const Transition& t = *batch[i];
    const double w = weights[static_cast<Eigen::Index>(i)];
    Vector2d delta;
    for (int j = 0; j < m; ++j)
      delta[j] = targets[i][j] - q(t.action * m + j, static_cast<Eigen::Index>(i));
    for (int j = 0; j < m; ++j) {
      loss += w * huber_loss(delta[j]) * inv_b;
      grad_out(t.action * m + j, static_cast<Eigen::Index>(i)) = -w * huber_grad(delta[j]) * inv_b;
    }
    result.priorities[i] = std::abs(t.omega_behavior.dot(delta)) + kPriorityFloor;
  }
  if (!std::isfinite(loss)) throw TrainingError("td_step: loss is not finite");

  Eigen::VectorXd grad = online.backward(cache, grad_out);
  const double grad_norm = grad.norm();
  if (grad_norm > kGradClipNorm) grad *= kGradClipNorm / grad_norm;
  opt.step(online.params(), grad);
  result.loss = loss;
  return result;
}

}  // namespace ranla
