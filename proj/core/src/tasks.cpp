#include "bdi/tasks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bdi/rng.hpp"

namespace bdi {

namespace {

constexpr int kDiscreteLength = 8;
constexpr int kDiscreteAlphabet = 4;

// Per-coordinate Styblinski-Tang term g(t) = (t^4 - 16 t^2 + 5 t) / 2.
double styblinski_term(double t) {
  return 0.5 * (t * t * t * t - 16.0 * t * t + 5.0 * t);
}

// Interior minimum of the Styblinski-Tang term, located by Newton on
// g'(t) = 2 t^3 - 16 t + 2.5 from the usual starting point.
double styblinski_argmin() {
  double t = -2.9;
  for (int it = 0; it < 64; ++it) {
    const double grad = 2.0 * t * t * t - 16.0 * t + 2.5;
    const double hess = 6.0 * t * t - 16.0;
    const double next = t - grad / hess;
    if (next == t) break;
    t = next;
  }
  return t;
}

double ackley_value(const Eigen::Ref<const Eigen::VectorXd>& t) {
  const double d = static_cast<double>(t.size());
  const double rms = std::sqrt(t.squaredNorm() / d);
  const double mean_cos =
      (2.0 * std::numbers::pi * t.array()).cos().sum() / d;
  return -20.0 * std::exp(-0.2 * rms) - std::exp(mean_cos) + 20.0 +
         std::numbers::e;
}

void check_in_bounds(const TaskSpec& task,
                     const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != task.lower.size()) {
    throw std::invalid_argument("oracle: design dimension mismatch");
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) >= task.lower(i) && x(i) <= task.upper(i))) {
      throw std::invalid_argument("oracle: design out of bounds at coordinate " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

std::string task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::QuadBowl: return "quadbowl";
    case TaskKind::NegAckley: return "negackley";
    case TaskKind::NegStyblinskiTang: return "negstyblinskitang";
    case TaskKind::DiscreteLandscape: return "discrete8";
  }
  throw std::logic_error("task_name: bad kind");
}

TaskKind task_kind_from_name(const std::string& name) {
  if (name == "quadbowl") return TaskKind::QuadBowl;
  if (name == "negackley") return TaskKind::NegAckley;
  if (name == "negstyblinskitang") return TaskKind::NegStyblinskiTang;
  if (name == "discrete8") return TaskKind::DiscreteLandscape;
  throw std::invalid_argument("unknown task: " + name);
}

bool task_is_discrete(TaskKind kind) {
  return kind == TaskKind::DiscreteLandscape;
}

TaskSpec make_task(TaskKind kind, int dim, std::uint64_t seed) {
  TaskSpec task;
  task.kind = kind;
  task.seed = seed;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);

  if (kind == TaskKind::DiscreteLandscape) {
    task.length = kDiscreteLength;
    task.alphabet = kDiscreteAlphabet;
    task.dim = task.length * task.alphabet;
    // Logits are unconstrained; the box exists only for uniform sampling.
    task.lower = Eigen::VectorXd::Constant(task.dim, 0.0);
    task.upper = Eigen::VectorXd::Constant(task.dim, 1.0);
    task.table.resize(task.length, task.alphabet);
    for (int j = 0; j < task.length; ++j) {
      for (int a = 0; a < task.alphabet; ++a) {
        task.table(j, a) = rng.normal();
      }
    }
    task.position_weight.resize(task.length);
    for (int j = 0; j < task.length; ++j) {
      task.position_weight(j) = rng.uniform(0.5, 1.5);
    }
    task.adjacency_bonus.resize(task.length - 1);
    for (int j = 0; j + 1 < task.length; ++j) {
      task.adjacency_bonus(j) = 0.3 * rng.normal();
    }
    return task;
  }

  if (dim < 1) throw std::invalid_argument("make_task: dim < 1");
  task.dim = dim;
  task.lower = Eigen::VectorXd::Constant(dim, -5.0);
  task.upper = Eigen::VectorXd::Constant(dim, 5.0);
  task.center.resize(dim);
  const double half = kind == TaskKind::QuadBowl ? 2.5 : 1.0;
  for (int i = 0; i < dim; ++i) {
    task.center(i) = rng.uniform(-half, half);
  }
  return task;
}

double oracle(const TaskSpec& task,
              const Eigen::Ref<const Eigen::VectorXd>& x) {
  switch (task.kind) {
    case TaskKind::QuadBowl:
      check_in_bounds(task, x);
      return -(x - task.center).squaredNorm();
    case TaskKind::NegAckley:
      check_in_bounds(task, x);
      return -ackley_value(x - task.center);
    case TaskKind::NegStyblinskiTang: {
      check_in_bounds(task, x);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        acc += styblinski_term(x(i) - task.center(i));
      }
      return -acc;
    }
    case TaskKind::DiscreteLandscape:
      return oracle_tokens(task, decode_flat(task, x));
  }
  throw std::logic_error("oracle: bad kind");
}

double oracle_tokens(const TaskSpec& task, const std::vector<int>& tokens) {
  if (!task.discrete()) {
    throw std::invalid_argument("oracle_tokens: task is not discrete");
  }
  if (static_cast<int>(tokens.size()) != task.length) {
    throw std::invalid_argument("oracle_tokens: wrong sequence length");
  }
  double score = 0.0;
  for (int j = 0; j < task.length; ++j) {
    const int t = tokens[static_cast<std::size_t>(j)];
    if (t < 0 || t >= task.alphabet) {
      throw std::invalid_argument("oracle_tokens: token out of range at " +
                                  std::to_string(j));
    }
    score += task.position_weight(j) * task.table(j, t);
  }
  for (int j = 0; j + 1 < task.length; ++j) {
    if (tokens[static_cast<std::size_t>(j)] ==
        tokens[static_cast<std::size_t>(j + 1)]) {
      score += task.adjacency_bonus(j);
    }
  }
  return score;
}

double global_max_score(const TaskSpec& task) {
  switch (task.kind) {
    case TaskKind::QuadBowl:
      return 0.0;
    case TaskKind::NegAckley:
      return 0.0;
    case TaskKind::NegStyblinskiTang: {
      const double t = styblinski_argmin();
      return -static_cast<double>(task.dim) * styblinski_term(t);
    }
    case TaskKind::DiscreteLandscape: {
      const std::vector<double> scores = enumerate_scores(task);
      double best = scores.front();
      for (double s : scores) best = std::max(best, s);
      return best;
    }
  }
  throw std::logic_error("global_max_score: bad kind");
}

std::vector<double> enumerate_scores(const TaskSpec& task) {
  if (!task.discrete()) {
    throw std::invalid_argument("enumerate_scores: task is not discrete");
  }
  std::size_t total = 1;
  for (int j = 0; j < task.length; ++j) {
    total *= static_cast<std::size_t>(task.alphabet);
  }
  std::vector<double> scores(total);
  std::vector<int> tokens(static_cast<std::size_t>(task.length), 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int j = task.length - 1; j >= 0; --j) {
      tokens[static_cast<std::size_t>(j)] =
          static_cast<int>(rest % static_cast<std::size_t>(task.alphabet));
      rest /= static_cast<std::size_t>(task.alphabet);
    }
    scores[idx] = oracle_tokens(task, tokens);
  }
  return scores;
}

std::vector<int> decode_discrete(
    const Eigen::Ref<const Eigen::MatrixXd>& logits) {
  std::vector<int> tokens(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index j = 0; j < logits.rows(); ++j) {
    int best = 0;
    for (Eigen::Index a = 1; a < logits.cols(); ++a) {
      if (logits(j, a) > logits(j, best)) best = static_cast<int>(a);
    }
    tokens[static_cast<std::size_t>(j)] = best;
  }
  return tokens;
}

Eigen::MatrixXd encode_discrete(const std::vector<int>& tokens, int alphabet,
                                double hot) {
  Eigen::MatrixXd logits =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tokens.size()), alphabet);
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    const int t = tokens[j];
    if (t < 0 || t >= alphabet) {
      throw std::invalid_argument("encode_discrete: token out of range");
    }
    logits(static_cast<Eigen::Index>(j), t) = hot;
  }
  return logits;
}

std::vector<int> decode_flat(const TaskSpec& task,
                             const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (!task.discrete()) {
    throw std::invalid_argument("decode_flat: task is not discrete");
  }
  if (flat.size() != task.length * task.alphabet) {
    throw std::invalid_argument("decode_flat: wrong logit length");
  }
  Eigen::MatrixXd logits(task.length, task.alphabet);
  for (int j = 0; j < task.length; ++j) {
    for (int a = 0; a < task.alphabet; ++a) {
      logits(j, a) = flat(j * task.alphabet + a);
    }
  }
  return decode_discrete(logits);
}

Eigen::VectorXd encode_flat(const TaskSpec& task, const std::vector<int>& tokens,
                            double hot) {
  const Eigen::MatrixXd logits = encode_discrete(tokens, task.alphabet, hot);
  Eigen::VectorXd flat(task.length * task.alphabet);
  for (int j = 0; j < task.length; ++j) {
    for (int a = 0; a < task.alphabet; ++a) {
      flat(j * task.alphabet + a) = logits(j, a);
    }
  }
  return flat;
}

}  // namespace bdi
