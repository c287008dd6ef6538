#include <doctest.h>

#include <cmath>

#include "bdi/rng.hpp"
#include "bdi/tasks.hpp"

using bdi::TaskKind;
using bdi::TaskSpec;

TEST_CASE("quadbowl peaks at its center") {
  const TaskSpec task = bdi::make_task(TaskKind::QuadBowl, 10, 7);
  CHECK(bdi::oracle(task, task.center) == 0.0);
  CHECK(bdi::global_max_score(task) == 0.0);

  Eigen::VectorXd off = task.center;
  off(3) += 0.5;
  CHECK(bdi::oracle(task, off) == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("negated ackley peaks at zero offset") {
  const TaskSpec task = bdi::make_task(TaskKind::NegAckley, 6, 11);
  CHECK(std::abs(bdi::oracle(task, task.center)) <= 1e-12);
  CHECK(bdi::global_max_score(task) == 0.0);
  Eigen::VectorXd off = task.center;
  off(0) += 1.0;
  CHECK(bdi::oracle(task, off) < -1e-3);
}

TEST_CASE("negated styblinski-tang maximum is attained at the known optimum") {
  const TaskSpec task = bdi::make_task(TaskKind::NegStyblinskiTang, 5, 13);
  const double best = bdi::global_max_score(task);

  // Locate the per-coordinate optimum independently by bisection on the
  // derivative 4 t^3 - 32 t + 5.
  auto dterm = [](double t) { return 4.0 * t * t * t - 32.0 * t + 5.0; };
  double lo = -3.5, hi = -2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dterm(lo) * dterm(mid) <= 0.0) hi = mid; else lo = mid;
  }
  const double t_opt = 0.5 * (lo + hi);
  const double per_coord = 0.5 * (t_opt * t_opt * t_opt * t_opt -
                                  16.0 * t_opt * t_opt + 5.0 * t_opt);
  CHECK(best == doctest::Approx(-5.0 * per_coord).epsilon(1e-12));
  CHECK(best == doctest::Approx(5.0 * 39.166).epsilon(1e-4));

  Eigen::VectorXd x = task.center.array() + t_opt;
  CHECK(bdi::oracle(task, x) == doctest::Approx(best).epsilon(1e-10));
  for (double delta : {-0.01, 0.01}) {
    Eigen::VectorXd probe = x;
    probe(2) += delta;
    CHECK(bdi::oracle(task, probe) < best);
  }
}

TEST_CASE("oracle is deterministic and enforces bounds") {
  const TaskSpec task = bdi::make_task(TaskKind::QuadBowl, 4, 3);
  bdi::Rng rng(17);
  Eigen::VectorXd x(4);
  for (int i = 0; i < 4; ++i) x(i) = rng.uniform(-5.0, 5.0);
  CHECK(bdi::oracle(task, x) == bdi::oracle(task, x));

  Eigen::VectorXd outside = x;
  outside(1) = 5.5;
  CHECK_THROWS_AS(bdi::oracle(task, outside), std::invalid_argument);
  Eigen::VectorXd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(bdi::oracle(task, wrong), std::invalid_argument);
}

TEST_CASE("discrete landscape enumeration") {
  const TaskSpec task = bdi::make_task(TaskKind::DiscreteLandscape, 0, 21);
  REQUIRE(task.length == 8);
  REQUIRE(task.alphabet == 4);
  REQUIRE(task.dim == 32);

  const std::vector<double> scores = bdi::enumerate_scores(task);
  REQUIRE(scores.size() == 65536);

  // Independent enumeration with eight explicit loops.
  double max_score = -1e300, min_score = 1e300;
  std::vector<int> tokens(8);
  for (tokens[0] = 0; tokens[0] < 4; ++tokens[0])
  for (tokens[1] = 0; tokens[1] < 4; ++tokens[1])
  for (tokens[2] = 0; tokens[2] < 4; ++tokens[2])
  for (tokens[3] = 0; tokens[3] < 4; ++tokens[3])
  for (tokens[4] = 0; tokens[4] < 4; ++tokens[4])
  for (tokens[5] = 0; tokens[5] < 4; ++tokens[5])
  for (tokens[6] = 0; tokens[6] < 4; ++tokens[6])
  for (tokens[7] = 0; tokens[7] < 4; ++tokens[7]) {
    const double s = bdi::oracle_tokens(task, tokens);
    max_score = std::max(max_score, s);
    min_score = std::min(min_score, s);
    std::size_t idx = 0;
    for (int j = 0; j < 8; ++j) {
      idx = idx * 4 + static_cast<std::size_t>(tokens[static_cast<std::size_t>(j)]);
    }
    REQUIRE(scores[idx] == s);
  }
  CHECK(bdi::global_max_score(task) == max_score);
  CHECK(max_score > min_score);
}

TEST_CASE("oracle_tokens validates input") {
  const TaskSpec task = bdi::make_task(TaskKind::DiscreteLandscape, 0, 5);
  CHECK_THROWS_AS(bdi::oracle_tokens(task, {0, 1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(bdi::oracle_tokens(task, {0, 1, 2, 3, 0, 1, 2, 7}),
                  std::invalid_argument);
  const TaskSpec continuous = bdi::make_task(TaskKind::QuadBowl, 4, 5);
  CHECK_THROWS_AS(bdi::oracle_tokens(continuous, {0, 1, 2, 3}),
                  std::invalid_argument);
}

TEST_CASE("encode/decode round trip") {
  const TaskSpec task = bdi::make_task(TaskKind::DiscreteLandscape, 0, 9);
  const std::vector<int> tokens{3, 0, 2, 2, 1, 0, 3, 1};
  const Eigen::MatrixXd logits = bdi::encode_discrete(tokens, task.alphabet);
  CHECK(bdi::decode_discrete(logits) == tokens);

  const Eigen::VectorXd flat = bdi::encode_flat(task, tokens, 2.0);
  CHECK(bdi::decode_flat(task, flat) == tokens);
  CHECK(flat(0 * 4 + 3) == 2.0);
  CHECK(flat(1 * 4 + 0) == 2.0);
  CHECK(flat.sum() == doctest::Approx(16.0));
}

TEST_CASE("decode ties break toward the lowest index") {
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(3, 4);
  logits(1, 2) = 1.0;
  logits(2, 1) = 1.0;
  logits(2, 3) = 1.0;  // ties with column 1; lowest index wins
  const std::vector<int> tokens = bdi::decode_discrete(logits);
  CHECK(tokens == std::vector<int>{0, 2, 1});
}

TEST_CASE("decode agrees with a naive per-row scan") {
  bdi::Rng rng(31);
  Eigen::MatrixXd logits(8, 4);
  for (int j = 0; j < 8; ++j) {
    for (int a = 0; a < 4; ++a) logits(j, a) = rng.normal();
  }
  const std::vector<int> tokens = bdi::decode_discrete(logits);
  for (int j = 0; j < 8; ++j) {
    int naive = 0;
    for (int a = 1; a < 4; ++a) {
      if (logits(j, a) > logits(j, naive)) naive = a;
    }
    CHECK(tokens[static_cast<std::size_t>(j)] == naive);
  }
}

TEST_CASE("task construction is deterministic in the seed") {
  const TaskSpec a = bdi::make_task(TaskKind::DiscreteLandscape, 0, 77);
  const TaskSpec b = bdi::make_task(TaskKind::DiscreteLandscape, 0, 77);
  CHECK((a.table.array() == b.table.array()).all());
  CHECK((a.position_weight.array() == b.position_weight.array()).all());

  const TaskSpec c = bdi::make_task(TaskKind::QuadBowl, 6, 77);
  const TaskSpec d = bdi::make_task(TaskKind::QuadBowl, 6, 78);
  CHECK((c.center.array() != d.center.array()).any());
}

TEST_CASE("task names round trip") {
  for (TaskKind kind :
       {TaskKind::QuadBowl, TaskKind::NegAckley, TaskKind::NegStyblinskiTang,
        TaskKind::DiscreteLandscape}) {
    CHECK(bdi::task_kind_from_name(bdi::task_name(kind)) == kind);
  }
  CHECK_THROWS_AS(bdi::task_kind_from_name("nope"), std::invalid_argument);
}
