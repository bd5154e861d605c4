#pragma once

// Cascaded tabular GAN. One generator stage per table column, chained in
// schema order: stage i consumes the shared noise vector plus everything the
// earlier stages produced, and emits its column's encoded block. A frozen
// secondary network per stage pads the not-yet-generated columns so both the
// critic and the per-column auxiliary learner always see a full-width row.
// The critic is trained with the WGAN gradient penalty objective; generator
// stages additionally minimize their auxiliary learner's loss.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gantab/encode.hpp"
#include "gantab/gbdt.hpp"
#include "gantab/nn.hpp"
#include "gantab/table.hpp"

namespace gantab {

enum class Precision { f32, f64 };

struct GanConfig {
  int epochs = 300;
  int batch_size = 512;
  int noise_dim = 128;
  double lambda_gp = 10.0;
  double lambda_al_first = 0.75;
  double lambda_al_last = 0.10;
  int d_steps = 1;
  double tau = 0.8;
  double real_noise_std = 0.1;
  double adam_alpha = 2e-4;
  double adam_beta1 = 0.50;
  double adam_beta2 = 0.99;
  std::vector<int> gen_hidden = {128, 64};
  std::vector<int> sec_hidden = {32};
  std::vector<int> disc_hidden = {256, 128};
  double leaky_slope = 0.01;
  Precision precision = Precision::f32;
  std::uint64_t seed = 0;
  double epsilon = 0.0;  // auxiliary label hardening fraction
  VgmParams vgm;
  AuxParams aux;
  bool check_finite = false;

  void validate(std::size_t train_rows) const;
};

// Linear interpolation of the auxiliary loss weights from the first stage to
// the last; m == 1 collapses to {first}.
std::vector<double> aux_coefficients(int m, double first, double last);

// Per-column generation head over the stage's hidden features. Numeric
// columns emit [tanh scalar | mode one-hot]; categorical columns a single
// one-hot block. Both one-hot parts go through the gumbel-softmax relaxation.
struct HeadParams {
  bool numeric = false;
  nn::Dense<double> scalar;  // numeric only
  nn::Dense<double> modes;   // mode or category logits
};

struct StageParams {
  nn::Stack<double> primary;
  HeadParams head;
  nn::Stack<double> secondary;          // frozen after init
  std::vector<HeadParams> sec_heads;    // columns after this stage; frozen
};

struct DiscParams {
  nn::Stack<double> stack;
  nn::Dense<double> out;
};

struct LossHistory {
  std::vector<double> d_loss;
  std::vector<double> g_adv;
  std::vector<std::vector<double>> aux;  // [epoch][stage], unweighted
  std::string to_csv() const;
};

class GanModel {
 public:
  std::shared_ptr<const DatasetSchema> schema;
  TableCodec codec;
  std::vector<AuxLearner> aux;  // one per column, schema order
  GanConfig config;
  std::vector<StageParams> stages;
  DiscParams disc;
  std::size_t train_rows = 0;

  int columns() const { return static_cast<int>(schema->columns.size()); }

  // Deterministic for a given seed; categorical cells and numeric modes are
  // sampled through the same gumbel mechanism used in training.
  DataTable sample(std::size_t n, std::uint64_t seed) const;
};

struct TrainResult {
  GanModel model;
  LossHistory history;
};

// Fits encoders and auxiliary learners on the training table, then runs the
// adversarial loop. Auxiliary learners train in parallel when the
// GANTAB_THREADS environment variable allows it.
TrainResult train_gan(const DataTable& train_table, const GanConfig& config);

}  // namespace gantab
