// hyda/data.hpp — synthetic task generation, CSV ingestion, splitting and
// deterministic mini-batching.
#pragma once

#include "hyda/multitask.hpp"
#include "hyda/rng.hpp"
#include "hyda/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hyda {

enum class TaskKind { regression, classification };

const char* to_string(TaskKind k);

struct Dataset {
  Matrix inputs;
  Matrix targets_main;
  Matrix targets_aux;
  TaskKind task_main = TaskKind::regression;
  TaskKind task_aux = TaskKind::regression;
  std::vector<std::string> feature_names;  // optional

  Index rows() const { return inputs.rows(); }
  std::uint64_t checksum() const;
};

enum class AuxMode { related, unrelated };

// Two regression tasks y_i = sigma_i * tanh((B + eps_i) x) + noise with a
// shared basis B. In unrelated mode the aux targets are replaced by uniform
// draws from the per-dimension output range of the main task over the whole
// dataset, severing any dependence on x.
struct ToySpec {
  Index n_train = 10000;
  Index n_val = 2000;
  Index n_test = 2000;
  Index input_dim = 75;
  Index output_dim = 25;
  double b_variance = 10.0;
  double eps_variance = 3.5;
  double sigma_main = 1.0;
  double sigma_aux = 10.0;
  // Per-task noise std; negative means the default 0.05 * sigma_i.
  double noise_std = -1.0;
  // Variance of the pre-tanh projections (B + eps) x. Inputs are stored
  // standard normal; the projection is rescaled to hit this variance.
  // Negative means 1 (the tanh's active range). Leaving the projections at
  // their raw variance of input_dim * (b_variance + eps_variance) saturates
  // the tanh into a sign function, which makes the targets nearly
  // unlearnable and blows the task gradient scales apart.
  double projection_variance = -1.0;
  AuxMode aux_mode = AuxMode::related;
  std::uint64_t seed = 1;

  // Multiplier applied to (B + eps) x to reach projection_variance.
  double projection_scale() const {
    const double target = projection_variance >= 0.0 ? projection_variance : 1.0;
    const double raw = static_cast<double>(input_dim) * (b_variance + eps_variance);
    return raw > 0.0 ? std::sqrt(target / raw) : 1.0;
  }

  Index total_rows() const { return n_train + n_val + n_test; }
  static ToySpec exp1(std::uint64_t seed);
  static ToySpec exp2(std::uint64_t seed);
};

Dataset generate_toy(const ToySpec& spec);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Deterministic shuffled partition; disjoint and exhaustive.
Splits split(const Dataset& dataset, const SplitFractions& fractions, std::uint64_t seed);
// Consecutive partition by the given counts (toy rows are already i.i.d.).
Splits split_counts(const Dataset& dataset, Index n_train, Index n_val, Index n_test);

Dataset select_rows(const Dataset& dataset, const std::vector<Index>& rows);

// ---------------------------------------------------------------------------
// CSV ingestion.

enum class ColumnRole { feature, target_main, target_aux, ignore };
// continuous: z-scored with training-split statistics. raw: numeric, no
// transform. categorical: one-hot over the training-split category set;
// unseen categories map to all-zeros with a logged warning.
enum class ColumnKind { continuous, raw, categorical };

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::feature;
  ColumnKind kind = ColumnKind::continuous;
};

struct CsvSchema {
  std::vector<ColumnSpec> columns;
  TaskKind task_main = TaskKind::regression;
  TaskKind task_aux = TaskKind::regression;
  // Training-split statistics for scaling/category sets come from this split.
  SplitFractions split;
  std::uint64_t split_seed = 1;
};

CsvSchema load_schema(const std::filesystem::path& path);
void save_schema(const CsvSchema& schema, const std::filesystem::path& path);

// Header row required. Features are emitted in schema order, each categorical
// expanding to its (sorted) training-split categories.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                 std::vector<std::string>* warnings = nullptr);

// Numeric CSV dump (17 significant digits) plus a matching raw-kind schema,
// so a written dataset reloads to the same matrices.
void save_csv(const Dataset& dataset, const std::filesystem::path& csv_path);
CsvSchema raw_schema_for(const Dataset& dataset, SplitFractions split, std::uint64_t split_seed);

// Binary cache: magic, version, dims and task kinds, then row-major
// little-endian float64 payloads for inputs / main targets / aux targets.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Mini-batching.

class SplitBatcher {
 public:
  SplitBatcher(const Dataset& dataset, Index batch_size, std::uint64_t shuffle_seed);

  // Batches partition each epoch's shuffled order; the final short batch is
  // emitted. Crossing an epoch boundary reshuffles deterministically from
  // (seed, epoch).
  Batch next_batch();

  Index batch_size() const { return batch_size_; }
  Index steps_per_epoch() const;
  long epoch() const { return epoch_; }

 private:
  void start_epoch();

  const Dataset* dataset_;
  Index batch_size_;
  std::uint64_t seed_;
  long epoch_ = -1;
  Index cursor_ = 0;
  std::vector<Index> order_;
};

}  // namespace hyda
