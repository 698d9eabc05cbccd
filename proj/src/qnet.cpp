#include "ranla/qnet.hpp"

#include <cmath>
#include <stdexcept>

namespace ranla {

namespace {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd relu(const MatrixXd& z) { return z.cwiseMax(0.0); }

}  // namespace

QNetwork::QNetwork(const QNetConfig& cfg) : m_cfg(cfg) {
  if (cfg.state_dim <= 0 || cfg.num_actions <= 0 || cfg.num_objectives <= 0 || cfg.hidden <= 0)
    throw std::invalid_argument("QNetwork: all dimensions must be positive");
  const int in = cfg.input_dim();
  const int h = cfg.hidden;
  const int out = cfg.output_dim();
  m_w1 = 0;
  m_b1 = m_w1 + h * in;
  m_w2 = m_b1 + h;
  m_b2 = m_w2 + h * h;
  m_w3 = m_b2 + h;
  m_b3 = m_w3 + out * h;
  m_params = VectorXd::Zero(m_b3 + out);
}

void QNetwork::init_he(Rng& rng) {
  const int in = m_cfg.input_dim();
  const int h = m_cfg.hidden;
  const int out = m_cfg.output_dim();
  auto fill = [&](int offset, int rows, int fan_in, int count) {
    (void)rows;
    const double std_dev = std::sqrt(2.0 / fan_in);
    for (int i = 0; i < count; ++i) m_params[offset + i] = rng.normal(0.0, std_dev);
  };
  fill(m_w1, h, in, h * in);
  fill(m_w2, h, h, h * h);
  fill(m_w3, out, h, out * h);
  m_params.segment(m_b1, h).setZero();
  m_params.segment(m_b2, h).setZero();
  m_params.segment(m_b3, out).setZero();
}

Eigen::MatrixXd QNetwork::forward(const Eigen::MatrixXd& x) const {
  ForwardCache cache;
  return forward(x, cache);
}

Eigen::MatrixXd QNetwork::forward(const Eigen::MatrixXd& x, ForwardCache& cache) const {
  const int in = m_cfg.input_dim();
  const int h = m_cfg.hidden;
  const int out = m_cfg.output_dim();
  if (x.rows() != in) throw std::invalid_argument("QNetwork::forward: input row count mismatch");

  Map<const MatrixXd> w1(m_params.data() + m_w1, h, in);
  Map<const VectorXd> b1(m_params.data() + m_b1, h);
  Map<const MatrixXd> w2(m_params.data() + m_w2, h, h);
  Map<const VectorXd> b2(m_params.data() + m_b2, h);
  Map<const MatrixXd> w3(m_params.data() + m_w3, out, h);
  Map<const VectorXd> b3(m_params.data() + m_b3, out);

  cache.x = x;
  cache.z1 = (w1 * x).colwise() + b1;
  cache.a1 = relu(cache.z1);
  cache.z2 = (w2 * cache.a1).colwise() + b2;
  cache.a2 = relu(cache.z2);
  return (w3 * cache.a2).colwise() + b3;
}

Eigen::VectorXd QNetwork::backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_out) const {
  const int in = m_cfg.input_dim();
  const int h = m_cfg.hidden;
  const int out = m_cfg.output_dim();
  if (grad_out.rows() != out || grad_out.cols() != cache.x.cols())
    throw std::invalid_argument("QNetwork::backward: gradient shape mismatch");

  Map<const MatrixXd> w2(m_params.data() + m_w2, h, h);
  Map<const MatrixXd> w3(m_params.data() + m_w3, out, h);

  VectorXd grad = VectorXd::Zero(m_params.size());
  Map<MatrixXd> g_w1(grad.data() + m_w1, h, in);
  Map<VectorXd> g_b1(grad.data() + m_b1, h);
  Map<MatrixXd> g_w2(grad.data() + m_w2, h, h);
  Map<VectorXd> g_b2(grad.data() + m_b2, h);
  Map<MatrixXd> g_w3(grad.data() + m_w3, out, h);
  Map<VectorXd> g_b3(grad.data() + m_b3, out);

  g_w3 = grad_out * cache.a2.transpose();
  g_b3 = grad_out.rowwise().sum();

  MatrixXd d2 = (w3.transpose() * grad_out).cwiseProduct(
      (cache.z2.array() > 0.0).cast<double>().matrix());
  g_w2 = d2 * cache.a1.transpose();
  g_b2 = d2.rowwise().sum();

  MatrixXd d1 = (w2.transpose() * d2).cwiseProduct(
      (cache.z1.array() > 0.0).cast<double>().matrix());
  g_w1 = d1 * cache.x.transpose();
  g_b1 = d1.rowwise().sum();

  return grad;
}

Eigen::VectorXd QNetwork::make_input(const StateVector& state, const PreferenceVector& omega) const {
  if (static_cast<int>(state.size()) != m_cfg.state_dim)
    throw std::invalid_argument("QNetwork::make_input: state length mismatch");
  VectorXd x(m_cfg.input_dim());
  for (int i = 0; i < m_cfg.state_dim; ++i) x[i] = static_cast<double>(state[i]);
  for (int j = 0; j < m_cfg.num_objectives; ++j) x[m_cfg.state_dim + j] = omega[j];
  return x;
}

Eigen::MatrixXd QNetwork::q_values(const StateVector& state, const PreferenceVector& omega) const {
  MatrixXd y = forward(make_input(state, omega));
  // Output index a * m + j -> entry (a, j).
  Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> q(
      y.data(), m_cfg.num_actions, m_cfg.num_objectives);
  return q;
}

AdamOptimizer::AdamOptimizer(int num_params, double lr, double beta1, double beta2, double eps)
    : m_lr(lr), m_beta1(beta1), m_beta2(beta2), m_eps(eps) {
  if (num_params <= 0) throw std::invalid_argument("AdamOptimizer: num_params must be positive");
  m_m = Eigen::VectorXd::Zero(num_params);
  m_v = Eigen::VectorXd::Zero(num_params);
}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != m_m.size() || grad.size() != m_m.size())
    throw std::invalid_argument("AdamOptimizer::step: size mismatch");
  ++m_t;
  m_m = m_beta1 * m_m + (1.0 - m_beta1) * grad;
  m_v = m_beta2 * m_v.array().matrix() + (1.0 - m_beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(m_beta1, static_cast<double>(m_t));
  const double c2 = 1.0 - std::pow(m_beta2, static_cast<double>(m_t));
  params.array() -=
      m_lr * (m_m.array() / c1) / ((m_v.array() / c2).sqrt() + m_eps);
}

}  // namespace ranla
