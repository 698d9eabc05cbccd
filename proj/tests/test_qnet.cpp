#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ranla/qnet.hpp"

using namespace ranla;

namespace {

QNetConfig small_config(int hidden = 8) {
  QNetConfig cfg;
  cfg.hidden = hidden;
  return cfg;
}

}  // namespace

TEST_SUITE("qnet") {

TEST_CASE("parameter count matches the three-layer layout") {
  const QNetConfig cfg;  // 32 -> 128 -> 128 -> 224
  QNetwork net(cfg);
  const int in = cfg.input_dim();
  const int h = cfg.hidden;
  const int out = cfg.output_dim();
  CHECK(in == 32);
  CHECK(out == 224);
  CHECK(net.num_params() == (in * h + h) + (h * h + h) + (h * out + out));
}

TEST_CASE("zero parameters map every input to zero") {
  QNetwork net(small_config());
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(net.config().input_dim(), 5);
  const Eigen::MatrixXd y = net.forward(x);
  CHECK(y.rows() == net.config().output_dim());
  CHECK(y.cols() == 5);
  CHECK(y.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("initialization and forward are deterministic in the seed") {
  QNetwork a(small_config());
  QNetwork b(small_config());
  Rng ra(17);
  Rng rb(17);
  a.init_he(ra);
  b.init_he(rb);
  CHECK(a.params() == b.params());
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(a.config().input_dim(), 3);
  CHECK(a.forward(x) == b.forward(x));

  Rng rc(18);
  QNetwork c(small_config());
  c.init_he(rc);
  CHECK(a.params() != c.params());
}

TEST_CASE("He initialization has the right weight scale and zero biases") {
  QNetConfig cfg;
  cfg.hidden = 256;  // large fan-in for a stable sample estimate
  QNetwork net(cfg);
  Rng rng(5);
  net.init_he(rng);
  // First-layer weights: fan_in = input_dim, std = sqrt(2 / fan_in).
  const int w1_count = cfg.input_dim() * cfg.hidden;
  const auto w1 = net.params().head(w1_count);
  const double mean = w1.mean();
  const double sd = std::sqrt((w1.array() - mean).square().sum() / (w1_count - 1));
  CHECK(std::abs(mean) < 0.01);  // SE = sd / sqrt(8192) ~ 0.003
  CHECK(sd == doctest::Approx(std::sqrt(2.0 / cfg.input_dim())).epsilon(0.05));
  // Biases of the first layer sit right after W1 and start at zero.
  const auto b1 = net.params().segment(w1_count, cfg.hidden);
  CHECK(b1.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("analytic gradients agree with central differences") {
  QNetwork net(small_config());
  Rng rng(23);
  net.init_he(rng);
  const int in = net.config().input_dim();
  const int out = net.config().output_dim();

  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(in, 4);
  // Fixed linear functional of the output: L = sum(C .* f(x)).
  const Eigen::MatrixXd c = Eigen::MatrixXd::Random(out, 4);

  QNetwork::ForwardCache cache;
  net.forward(x, cache);
  const Eigen::VectorXd grad = net.backward(cache, c);
  REQUIRE(grad.size() == net.num_params());

  Rng pick(31);
  const double h = 1e-6;
  for (int trial = 0; trial < 40; ++trial) {
    const int i = pick.uniform_int(0, net.num_params() - 1);
    const double saved = net.params()(i);
    net.params()(i) = saved + h;
    const double up = (c.array() * net.forward(x).array()).sum();
    net.params()(i) = saved - h;
    const double down = (c.array() * net.forward(x).array()).sum();
    net.params()(i) = saved;
    const double numeric = (up - down) / (2.0 * h);
    if (std::abs(numeric) > 1e-8 || std::abs(grad(i)) > 1e-8) {
      CHECK(grad(i) == doctest::Approx(numeric).epsilon(1e-4));
    }
  }
}

TEST_CASE("backward is linear in the output gradient") {
  QNetwork net(small_config());
  Rng rng(7);
  net.init_he(rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(net.config().input_dim(), 2);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(net.config().output_dim(), 2);
  QNetwork::ForwardCache cache;
  net.forward(x, cache);
  const Eigen::VectorXd g1 = net.backward(cache, g);
  const Eigen::VectorXd g2 = net.backward(cache, 2.0 * g);
  CHECK((g2 - 2.0 * g1).cwiseAbs().maxCoeff() == doctest::Approx(0.0).scale(1e-12));
}

TEST_CASE("batched forward equals per-column forward") {
  QNetwork net(small_config());
  Rng rng(11);
  net.init_he(rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(net.config().input_dim(), 7);
  const Eigen::MatrixXd y = net.forward(x);
  for (int col = 0; col < x.cols(); ++col) {
    const Eigen::MatrixXd yc = net.forward(x.col(col));
    CHECK((yc - y.col(col)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
}

TEST_CASE("q_values reshapes the flat output as action-major") {
  QNetwork net(small_config());
  Rng rng(13);
  net.init_he(rng);
  StateVector state{};
  for (int i = 0; i < kStateDim; ++i) state[static_cast<std::size_t>(i)] = 0.01f * i;
  const PreferenceVector omega(0.3, 0.7);

  const Eigen::VectorXd input = net.make_input(state, omega);
  REQUIRE(input.size() == net.config().input_dim());
  CHECK(input(0) == doctest::Approx(0.0));
  CHECK(input(kStateDim - 1) == doctest::Approx(0.29f));
  CHECK(input(kStateDim) == doctest::Approx(0.3));
  CHECK(input(kStateDim + 1) == doctest::Approx(0.7));

  const Eigen::MatrixXd flat = net.forward(input);
  const Eigen::MatrixXd q = net.q_values(state, omega);
  REQUIRE(q.rows() == kNumActions);
  REQUIRE(q.cols() == kNumObjectives);
  for (int a = 0; a < kNumActions; ++a) {
    for (int j = 0; j < kNumObjectives; ++j) {
      CHECK(q(a, j) == doctest::Approx(flat(a * kNumObjectives + j, 0)));
    }
  }
}

TEST_CASE("network output changes with the preference input") {
  QNetwork net(small_config(16));
  Rng rng(29);
  net.init_he(rng);
  StateVector state{};
  state[0] = 1.0f;
  const Eigen::MatrixXd qa = net.q_values(state, PreferenceVector(1.0, 0.0));
  const Eigen::MatrixXd qb = net.q_values(state, PreferenceVector(0.0, 1.0));
  CHECK((qa - qb).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("the network is Lipschitz with the product of spectral norms") {
  QNetConfig cfg = small_config(16);
  QNetwork net(cfg);
  Rng rng(41);
  net.init_he(rng);
  const int in = cfg.input_dim();
  const int h = cfg.hidden;
  const int out = cfg.output_dim();

  // Rebuild the weight matrices from the flat layout (W col-major, then b).
  int off = 0;
  const Eigen::MatrixXd w1 = Eigen::Map<const Eigen::MatrixXd>(net.params().data() + off, h, in);
  off += h * in + h;
  const Eigen::MatrixXd w2 = Eigen::Map<const Eigen::MatrixXd>(net.params().data() + off, h, h);
  off += h * h + h;
  const Eigen::MatrixXd w3 = Eigen::Map<const Eigen::MatrixXd>(net.params().data() + off, out, h);

  const double bound = Eigen::JacobiSVD<Eigen::MatrixXd>(w1).singularValues()(0) *
                       Eigen::JacobiSVD<Eigen::MatrixXd>(w2).singularValues()(0) *
                       Eigen::JacobiSVD<Eigen::MatrixXd>(w3).singularValues()(0);
  Rng pairs(43);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x1(in), x2(in);
    for (int i = 0; i < in; ++i) {
      x1(i) = pairs.uniform() * 2 - 1;
      x2(i) = pairs.uniform() * 2 - 1;
    }
    const double dy = (net.forward(x1) - net.forward(x2)).norm();
    const double dx = (x1 - x2).norm();
    CHECK(dy <= bound * dx * (1.0 + 1e-12));
  }
}

TEST_CASE("Adam's first bias-corrected step has unit-learning-rate magnitude") {
  const int n = 6;
  AdamOptimizer opt(n, /*lr=*/1e-3);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad(n);
  grad << 1.0, -2.0, 0.5, -0.25, 3.0, -1.0;
  opt.step(params, grad);
  CHECK(opt.steps_taken() == 1);
  for (int i = 0; i < n; ++i) {
    // After bias correction the first update is -lr * sign(g) up to eps.
    CHECK(params(i) == doctest::Approx(-1e-3 * (grad(i) > 0 ? 1.0 : -1.0)).epsilon(1e-4));
  }
}

TEST_CASE("Adam shrinks a quadratic objective") {
  const int n = 4;
  AdamOptimizer opt(n, /*lr=*/0.05);
  Eigen::VectorXd params(n);
  params << 1.0, -2.0, 3.0, -0.5;
  const Eigen::VectorXd start = params;
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::VectorXd grad = 2.0 * params;  // d/dx of ||x||^2
    opt.step(params, grad);
  }
  CHECK(params.norm() < 0.05 * start.norm());
  CHECK(opt.steps_taken() == 500);
}

TEST_CASE("optimizer state is exposed for checkpointing") {
  AdamOptimizer opt(3, 1e-2);
  Eigen::VectorXd params = Eigen::VectorXd::Ones(3);
  Eigen::VectorXd grad = Eigen::VectorXd::Ones(3);
  opt.step(params, grad);
  opt.step(params, grad);

  AdamOptimizer restored(3, 1e-2);
  restored.first_moment() = opt.first_moment();
  restored.second_moment() = opt.second_moment();
  restored.set_steps_taken(opt.steps_taken());

  Eigen::VectorXd pa = params;
  Eigen::VectorXd pb = params;
  opt.step(pa, grad);
  restored.step(pb, grad);
  CHECK((pa - pb).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

}  // TEST_SUITE
