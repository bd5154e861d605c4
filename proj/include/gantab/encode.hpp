#pragma once

// Feature encoding. Numeric columns get a variational Gaussian mixture
// (VGM): each value is assigned a sampled mode and rescaled to
// (x - mu_k) / (4 sigma_k), emitted as [scalar, mode one-hot]. Categorical
// columns are one-hot with dictionaries frozen from the training split.
// Surplus mixture components collapse under the Bayesian fit and are pruned
// by a weight threshold.

#include <cstdint>
#include <string>
#include <vector>

#include "gantab/rng.hpp"
#include "gantab/table.hpp"
#include "gantab/tensor.hpp"

namespace gantab {

struct VgmParams {
  int max_components = 10;
  double weight_threshold = 0.005;
  // Surplus components drain slowly once the clusters are fit; a tight
  // tolerance lets that collapse finish instead of freezing duplicates.
  int max_iterations = 2000;
  double tolerance = 1e-10;
};

struct VgmTrace {
  std::vector<double> elbo;  // one entry per iteration, non-decreasing
};

struct VgmEncoder {
  std::vector<double> weights;  // sum to 1 after pruning
  std::vector<double> means;    // ascending
  std::vector<double> stddevs;
  int modes() const { return static_cast<int>(weights.size()); }
};

VgmEncoder fit_vgm(const std::vector<double>& values, const VgmParams& params,
                   std::uint64_t seed, VgmTrace* trace = nullptr);

// Posterior mode responsibilities p(k | x), normalized.
std::vector<double> vgm_posterior(const VgmEncoder& enc, double x);

struct EncodedNumeric {
  double scalar = 0.0;  // clamped to [-1, 1]
  int mode = 0;
};

// Samples the mode from the posterior (consumes one uniform draw), then
// rescales within that mode.
EncodedNumeric vgm_encode(const VgmEncoder& enc, double x, Rng& rng);

double vgm_decode_hard(const VgmEncoder& enc, double scalar, int mode);
// Soft decode: probability-weighted mixture of the per-mode inversions.
// mode_probs must be a simplex of size modes().
double vgm_decode_soft(const VgmEncoder& enc, double scalar,
                       const std::vector<double>& mode_probs);

struct OneHotEncoder {
  std::vector<std::string> labels;  // first-appearance order in the training split
  int index_of(const std::string& label) const;  // -1 if unseen
  int size() const { return static_cast<int>(labels.size()); }
};

struct LayoutSlice {
  int offset = 0;
  int width = 0;
};

struct ColumnLayout {
  std::vector<LayoutSlice> cols;  // one per schema column
  int total_width = 0;
};

struct NumericStats {
  double mean = 0, stddev = 1, min = 0, max = 0;
};

// Per-table bundle of fitted encoders plus the flattened layout.
class TableCodec {
 public:
  void fit(const DataTable& train, const VgmParams& params, std::uint64_t seed);
  bool fitted() const { return fitted_; }

  const ColumnLayout& layout() const { return layout_; }
  const DatasetSchema& schema() const { return *schema_; }
  std::shared_ptr<const DatasetSchema> schema_ptr() const { return schema_; }
  const VgmEncoder& vgm(int col) const;
  const OneHotEncoder& onehot(int col) const;
  const NumericStats& stats(int col) const;

  // Flattened [scalar + mode one-hot | category one-hot] encoding. Mode
  // sampling consumes rng draws row-major. Unseen categories are an error.
  Tensor<double> encode(const DataTable& table, Rng& rng) const;

  // Hard decode: mode/category by argmax (lowest index wins ties).
  DataTable decode(const Tensor<double>& encoded) const;

  // Raw matrix for the auxiliary learners / attack distance work: numeric
  // passthrough, categorical as integer codes in this codec's dictionaries.
  Tensor<double> encode_raw(const DataTable& table) const;

  // Deserialization support.
  void restore(std::shared_ptr<const DatasetSchema> schema,
               std::vector<VgmEncoder> vgms, std::vector<OneHotEncoder> onehots,
               std::vector<NumericStats> stats);

 private:
  std::shared_ptr<const DatasetSchema> schema_;
  std::vector<int> slot_;               // per column: index into vgms_ or onehots_
  std::vector<VgmEncoder> vgms_;        // numeric columns, schema order
  std::vector<OneHotEncoder> onehots_;  // categorical columns, schema order
  std::vector<NumericStats> stats_;     // per schema column (identity for categorical)
  ColumnLayout layout_;
  bool fitted_ = false;

  void build_layout();
};

}  // namespace gantab
