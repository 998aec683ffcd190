// hyda/multitask.hpp — hard-parameter-sharing network: one shared encoder,
// two task heads, with the parameter partition (shared, main head, aux head).
#pragma once

#include "hyda/nn.hpp"
#include "hyda/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

namespace hyda {

enum class Task { main, aux };
enum class ParamGroup { shared, head_main, head_aux };

const char* to_string(Task t);

struct Batch {
  Matrix inputs;
  Matrix targets_main;
  Matrix targets_aux;
  std::vector<Index> indices;  // source-row ids
};

// Per-group gradients of one loss over one mini-batch. Only the selected
// task's head slot is populated.
struct GradientBundle {
  Vector grad_shared;
  std::optional<Vector> grad_main;
  std::optional<Vector> grad_aux;
  Task source_task = Task::main;
};

class MultiTaskNet {
 public:
  struct Counters {
    std::uint64_t backward_passes = 0;
    std::uint64_t metric_evals = 0;
    void reset() { backward_passes = 0; metric_evals = 0; }
  };

  MultiTaskNet() = default;
  MultiTaskNet(Mlp encoder, Mlp head_main, Mlp head_aux, Loss loss_main, Loss loss_aux);

  const Mlp& encoder() const { return encoder_; }
  const Mlp& head(Task t) const { return t == Task::main ? head_main_ : head_aux_; }
  const Loss& loss(Task t) const { return t == Task::main ? loss_main_ : loss_aux_; }

  Mlp& group(ParamGroup g);
  const Mlp& group(ParamGroup g) const;

  // Instrumentation only; excluded from any checksum.
  Counters& counters() const { return counters_; }

  std::uint64_t params_checksum() const;
  std::uint64_t group_checksum(ParamGroup g) const { return group(g).params_checksum(); }

 private:
  Mlp encoder_;
  Mlp head_main_;
  Mlp head_aux_;
  Loss loss_main_;
  Loss loss_aux_;
  mutable Counters counters_;
};

struct TaskForward {
  Matrix pred;
  MlpCache encoder_cache;
  MlpCache head_cache;
};

TaskForward task_forward(const MultiTaskNet& net, const Batch& batch, Task task);

// Loss value plus gradients for (shared, selected head) at the current
// parameters. A sigmoid output layer paired with a BCE loss is differentiated
// as one fused unit (gradient (p - t)/n at the last pre-activation).
std::pair<double, GradientBundle> task_gradients(const MultiTaskNet& net, const Batch& batch,
                                                 Task task);

// theta_group -= step_size * grad. Other groups untouched.
void apply_update(MultiTaskNet& net, ParamGroup group, const Vector& grad, double step_size);

// groups_mask bits: 1 << ParamGroup.
class ParamSnapshot {
 public:
  ParamSnapshot() = default;

  bool has(ParamGroup g) const { return values_[index(g)].has_value(); }
  const Vector& values(ParamGroup g) const;

  friend ParamSnapshot snapshot(const MultiTaskNet& net, unsigned groups_mask);
  friend void restore(MultiTaskNet& net, const ParamSnapshot& snap);

 private:
  static std::size_t index(ParamGroup g) { return static_cast<std::size_t>(g); }
  std::array<std::optional<Vector>, 3> values_;
};

constexpr unsigned group_bit(ParamGroup g) { return 1u << static_cast<unsigned>(g); }
constexpr unsigned kAllGroups =
    group_bit(ParamGroup::shared) | group_bit(ParamGroup::head_main) | group_bit(ParamGroup::head_aux);

ParamSnapshot snapshot(const MultiTaskNet& net, unsigned groups_mask = kAllGroups);
// Bit-exact restore of every group held by the snapshot.
void restore(MultiTaskNet& net, const ParamSnapshot& snap);

// Checkpoint file: magic, version, then per group the layer dims followed by
// a flat little-endian float64 stream per group (flattening order of nn.hpp).
void save_checkpoint(const MultiTaskNet& net, const std::filesystem::path& path);
void load_checkpoint(MultiTaskNet& net, const std::filesystem::path& path);

}  // namespace hyda
