#pragma once

// White-box attack simulation: an adversary holding the trained auxiliary
// learners repeatedly re-imputes every column of a subset of synthetic rows,
// drifting them toward the training manifold. Reported distances quantify
// how close the attacked rows get to real training records.

#include <cstdint>
#include <string>
#include <vector>

#include "gantab/encode.hpp"
#include "gantab/gbdt.hpp"
#include "gantab/table.hpp"

namespace gantab {

struct AttackConfig {
  int iterations = 5;
  double attacked_fraction = 0.10;
  bool access_preprocessors = false;
  std::uint64_t seed = 0;

  void validate() const;  // iterations >= 1, fraction in (0, 1]
};

struct AttackOutcome {
  DataTable attacked;              // full table; unattacked rows untouched
  std::vector<std::size_t> rows;   // attacked row ids, ascending
};

// Selects round(fraction * N) seeded rows and, per iteration, overwrites each
// column in schema order with its auxiliary learner's prediction. With
// access_preprocessors the attacker encodes/decodes through the model's
// fitted dictionaries (codec must be non-null); without access it refits
// dictionaries from the synthetic table alone, so class indices may
// misalign. Predicted class indices outside the attacker's dictionary leave
// the cell unchanged.
AttackOutcome whitebox_attack(const DataTable& synth,
                              const std::vector<AuxLearner>& learners,
                              const TableCodec* codec, const AttackConfig& config);

struct AttackReport {
  double euc_to_train = 0.0;       // mean nearest-neighbor distance to train
  double euc_to_preattack = 0.0;   // mean row-wise drift caused by the attack
  double epsilon = 0.0;            // hardening fraction the learners saw
  bool access_preprocessors = false;
  std::size_t attacked_rows = 0;

  // Stable "key = value" lines.
  std::string to_text() const;
};

struct RowDistance {
  std::size_t row = 0;
  double to_train = 0.0;
  double to_preattack = 0.0;
};

// Distances in the min-max normalized one-hot space. Numeric bounds and the
// base label order come from the train table; labels the train table lacks
// extend the space. `rows` selects which rows of attacked/preattack to score.
AttackReport attack_distances(const DataTable& attacked, const DataTable& preattack,
                              const DataTable& train,
                              const std::vector<std::size_t>& rows,
                              std::vector<RowDistance>* per_row = nullptr);

}  // namespace gantab
