#ifndef BDI_TASKS_HPP
#define BDI_TASKS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace bdi {

// Synthetic benchmark landscapes with exactly evaluable oracles. The oracle
// is used only to build datasets and score final designs, never inside the
// design optimization itself.
enum class TaskKind { QuadBowl, NegAckley, NegStyblinskiTang, DiscreteLandscape };

std::string task_name(TaskKind kind);
TaskKind task_kind_from_name(const std::string& name);  // throws on unknown
bool task_is_discrete(TaskKind kind);

struct TaskSpec {
  TaskKind kind = TaskKind::QuadBowl;
  int dim = 10;        // design dimension; length * alphabet for discrete
  int length = 0;      // discrete sequence length
  int alphabet = 0;    // discrete alphabet size
  Eigen::VectorXd lower;  // design box
  Eigen::VectorXd upper;
  std::uint64_t seed = 0;

  // Continuous landscape center, drawn from the seed.
  Eigen::VectorXd center;

  // Discrete landscape coefficients, drawn from the seed.
  Eigen::MatrixXd table;            // length x alphabet per-token values
  Eigen::VectorXd position_weight;  // length
  Eigen::VectorXd adjacency_bonus;  // length - 1, reward for equal neighbors

  bool discrete() const { return kind == TaskKind::DiscreteLandscape; }
};

// Builds a task. For DiscreteLandscape `dim` is ignored and the shape is the
// fixed length-8 / 4-letter landscape (fully enumerable, 65536 sequences).
TaskSpec make_task(TaskKind kind, int dim, std::uint64_t seed);

// Exact score of a design. Continuous designs must lie inside the box;
// discrete designs are flat logit vectors and are decoded first.
double oracle(const TaskSpec& task, const Eigen::Ref<const Eigen::VectorXd>& x);

// Exact score of a token sequence (discrete tasks only).
double oracle_tokens(const TaskSpec& task, const std::vector<int>& tokens);

// The landscape's global maximum score. Analytic for the continuous tasks,
// exhaustive enumeration for the discrete one.
double global_max_score(const TaskSpec& task);

// All scores of the discrete landscape in token-lexicographic order
// (tokens[length-1] fastest). Size alphabet^length.
std::vector<double> enumerate_scores(const TaskSpec& task);

// Per-row argmax, lowest index on ties.
std::vector<int> decode_discrete(const Eigen::Ref<const Eigen::MatrixXd>& logits);

// One-hot style logits: `hot` at each token position, zero elsewhere.
Eigen::MatrixXd encode_discrete(const std::vector<int>& tokens, int alphabet,
                                double hot = 1.0);

// Flat-vector views of the logit matrix, row-major by position:
// flat[position * alphabet + letter].
std::vector<int> decode_flat(const TaskSpec& task,
                             const Eigen::Ref<const Eigen::VectorXd>& flat);
Eigen::VectorXd encode_flat(const TaskSpec& task, const std::vector<int>& tokens,
                            double hot = 1.0);

}  // namespace bdi

#endif  // BDI_TASKS_HPP
