#pragma once

/**
 * @file training.hpp
 * @brief Trajectory dataset generation, the three training losses, and the
 *        Adam training loop for the learned preconditioner.
 *
 * A dataset fixes one operator A and holds per-sample solver trajectories:
 * the right-hand side b, the converged solution, and residual snapshots
 * (iterate x_k, residual r_k = b - A x_k) recorded while a two-grid
 * preconditioned GMRES run drives b to convergence.
 *
 * Losses over a preconditioner application M(.):
 *   condition: mean over snapshots of ||r_k - A M(r_k)||^2
 *   residual:  mean over samples   of ||b   - A M(b)  ||^2
 *   data:      mean over samples   of ||M(b) - x*     ||^2
 * An exact inverse drives all three to zero; the zero map leaves the mean
 * squared residual norms.
 */

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "npsolve/autodiff.hpp"
#include "npsolve/csr.hpp"
#include "npsolve/grf.hpp"
#include "npsolve/krylov.hpp"
#include "npsolve/namg.hpp"
#include "npsolve/pde.hpp"

namespace npsolve {

struct DatasetConfig {
  PdeFamily family;
  GridSpec grid;
  int num_samples = 8;
  double grf_length_scale = 0.1;
  double grf_variance = 1.0;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  int max_iters = 100;
  int record_stride = 1;

  void validate() const;
};

struct TrainSample {
  DenseVector rhs;
  DenseVector solution;  // final iterate of the recorded run
  std::vector<Snapshot> snapshots;
  bool converged = false;
  int iterations = 0;
};

struct Dataset {
  DatasetConfig config;
  CsrMatrix matrix;
  std::vector<TrainSample> samples;
};

/// Right-hand side draw: one random field per degree-of-freedom component,
/// interleaved; the field for component c of sample s uses seed
/// base_seed + s * dofs + c.
DenseVector sample_rhs(const PdeFamily& family, const GridSpec& grid,
                       double length_scale, double variance,
                       std::uint64_t base_seed, int sample_index);

/// Assembles the operator and records one trajectory per sample. Right-hand
/// sides are random-field draws with per-sample seeds derived from
/// config.seed.
Dataset generate_dataset(const DatasetConfig& cfg);

void write_dataset(const Dataset& ds, const std::string& dir);
Dataset read_dataset(const std::string& dir);

// ---------------------------------------------------------------------------
// Losses over an arbitrary application (oracle-checkable forms).

using ApplyFn = std::function<DenseVector(const DenseVector&)>;

double condition_loss(const CsrMatrix& A,
                      const std::vector<TrainSample>& samples,
                      const ApplyFn& apply);
double residual_loss(const CsrMatrix& A,
                     const std::vector<TrainSample>& samples,
                     const ApplyFn& apply);
double data_loss(const std::vector<TrainSample>& samples, const ApplyFn& apply);

// ---------------------------------------------------------------------------
// Training loop.

struct LossWeights {
  double condition = 1.0;
  double residual = 1.0;
  double data = 1.0;
};

struct EpochLog {
  int epoch = 0;
  double total = 0.0;
  double data = 0.0;
  double residual = 0.0;
  double condition = 0.0;
};

struct TrainConfig {
  int epochs = 150;
  ad::AdamConfig adam;
  LossWeights weights;
  std::uint64_t seed = 0;
  /// Per-epoch CSV log (epoch,loss_total,loss_data,loss_residual,
  /// loss_condition); empty disables it.
  std::string log_csv;

  void validate() const;
};

struct TrainResult {
  double best_loss = 0.0;
  int best_epoch = 0;
  std::vector<EpochLog> history;
};

/// One Adam step per sample, samples reshuffled each epoch with the training
/// seed. Zero-weight loss components are skipped entirely. The model is left
/// holding the parameters of the best epoch by mean total loss. Throws if
/// the loss stops being finite.
TrainResult train_model(NamgModel& model, const Dataset& ds,
                        const TrainConfig& cfg);

}  // namespace npsolve
