#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "ranla/replay.hpp"
#include "ranla/stats.hpp"

using namespace ranla;

namespace {

Transition make_transition(int tag) {
  Transition t;
  t.meta.tti = tag;
  t.action = tag % kNumActions;
  t.reward = Eigen::Vector2d(0.1 * tag, -0.1 * tag);
  return t;
}

}  // namespace

TEST_SUITE("replay") {

TEST_CASE("eviction is FIFO regardless of priority") {
  ReplayBuffer buf(10, 0.6);
  for (int i = 0; i < 15; ++i) buf.push(make_transition(i));
  CHECK(buf.size() == 10);
  CHECK(buf.capacity() == 10);
  std::set<int> tags;
  for (size_t i = 0; i < buf.size(); ++i) tags.insert(buf.at(i).meta.tti);
  CHECK(tags == std::set<int>{5, 6, 7, 8, 9, 10, 11, 12, 13, 14});
}

TEST_CASE("sampling an empty buffer throws") {
  ReplayBuffer buf(8, 0.6);
  Rng rng(1);
  CHECK_THROWS_AS((void)buf.sample(4, 0.4, rng), std::runtime_error);
}

TEST_CASE("equal priorities sample uniformly with unit weights") {
  const size_t n = 10;
  ReplayBuffer buf(n, 0.6);
  for (int i = 0; i < static_cast<int>(n); ++i) buf.push(make_transition(i));

  Rng rng(77);
  std::vector<int64_t> counts(n, 0);
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    const auto batch = buf.sample(1, 0.4, rng);
    counts[batch.indices[0]]++;
    CHECK(batch.weights(0) == doctest::Approx(1.0));
  }
  std::vector<double> expected(n, draws / static_cast<double>(n));
  // 0.999 quantile of chi-squared with 9 degrees of freedom.
  CHECK(chi2_stat(counts, expected) < 27.877165);
}

TEST_CASE("high-priority items dominate sampling") {
  ReplayBuffer buf(10, 0.6);
  for (int i = 0; i < 10; ++i) buf.push(make_transition(i));
  // Crush everything except item 3.
  std::vector<size_t> idx;
  std::vector<double> pri;
  for (size_t i = 0; i < 10; ++i) {
    idx.push_back(i);
    pri.push_back(i == 3 ? 1000.0 : 1e-3);
  }
  buf.update_priorities(idx, pri);

  Rng rng(5);
  int hits = 0;
  const int draws = 2000;
  for (int d = 0; d < draws; ++d) {
    const auto batch = buf.sample(1, 0.4, rng);
    if (batch.indices[0] == 3) ++hits;
  }
  // (1000/0.001)^0.6 ~ 4000:1 against nine rivals.
  CHECK(hits > draws * 95 / 100);
}

TEST_CASE("alpha of one makes sampling exactly proportional") {
  ReplayBuffer buf(2, 1.0);
  buf.push(make_transition(0));
  buf.push(make_transition(1));
  buf.update_priorities({0, 1}, {3.0, 1.0});

  Rng rng(11);
  int first = 0;
  const int draws = 40000;
  for (int d = 0; d < draws; ++d) {
    const auto batch = buf.sample(1, 1.0, rng);
    if (batch.indices[0] == 0) ++first;
  }
  CHECK(static_cast<double>(first) / draws == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("importance weights invert the sampling distribution at beta 1") {
  ReplayBuffer buf(2, 1.0);
  buf.push(make_transition(0));
  buf.push(make_transition(1));
  buf.update_priorities({0, 1}, {3.0, 1.0});

  // Large batch so both items appear; the rare item carries weight 1,
  // the frequent item carries P(rare)/P(frequent) = 1/3.
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto batch = buf.sample(64, 1.0, rng);
    bool saw_both = false;
    std::set<size_t> seen(batch.indices.begin(), batch.indices.end());
    saw_both = seen.count(0) && seen.count(1);
    if (!saw_both) continue;
    for (size_t k = 0; k < batch.indices.size(); ++k) {
      const double expect = batch.indices[k] == 1 ? 1.0 : 1.0 / 3.0;
      CHECK(batch.weights(static_cast<Eigen::Index>(k)) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("new items inherit the running maximum priority") {
  ReplayBuffer buf(4, 1.0);
  buf.push(make_transition(0));
  CHECK(buf.max_priority() == doctest::Approx(1.0));
  buf.update_priorities({0}, {8.0});
  CHECK(buf.max_priority() == doctest::Approx(8.0));

  // The next push enters at priority 8: against the old item it is 1:1.
  buf.push(make_transition(1));
  Rng rng(3);
  int second = 0;
  const int draws = 20000;
  for (int d = 0; d < draws; ++d) {
    const auto batch = buf.sample(1, 1.0, rng);
    if (batch.indices[0] == 1) ++second;
  }
  CHECK(static_cast<double>(second) / draws == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("priority updates validate their arguments") {
  ReplayBuffer buf(4, 0.6);
  buf.push(make_transition(0));
  CHECK_THROWS_AS(buf.update_priorities({0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(buf.update_priorities({0}, {-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(buf.update_priorities({0}, {std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(buf.update_priorities({5}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(buf.update_priorities({0, 0}, {1.0}), std::invalid_argument);  // size mismatch
}

TEST_CASE("sampled indices always address live items") {
  ReplayBuffer buf(33, 0.6);  // capacity off the power-of-two grid
  Rng rng(21);
  int pushed = 0;
  for (int round = 0; round < 200; ++round) {
    const int burst = rng.uniform_int(1, 7);
    for (int i = 0; i < burst; ++i) buf.push(make_transition(pushed++));
    const auto batch = buf.sample(rng.uniform_int(1, 16), rng.uniform(), rng);
    REQUIRE(batch.indices.size() == batch.items.size());
    for (size_t k = 0; k < batch.indices.size(); ++k) {
      REQUIRE(batch.indices[k] < buf.size());
      REQUIRE(batch.items[k] == &buf.at(batch.indices[k]));
      REQUIRE(std::isfinite(batch.weights(static_cast<Eigen::Index>(k))));
      REQUIRE(batch.weights(static_cast<Eigen::Index>(k)) > 0.0);
      REQUIRE(batch.weights(static_cast<Eigen::Index>(k)) <= 1.0 + 1e-12);
    }
    // Occasionally rewrite priorities to exercise the tree.
    if (round % 7 == 0) {
      std::vector<double> pri(batch.indices.size());
      for (auto& p : pri) p = rng.uniform() * 10 + 1e-3;
      buf.update_priorities(batch.indices, pri);
    }
  }
}

}  // TEST_SUITE
