#pragma once

/**
 * @file namg.hpp
 * @brief Learned algebraic-multigrid-style preconditioner: damped-Jacobi
 *        relaxation around a learned coarse correction built from lifted
 *        node tokens, a masked-softmax restriction, and multi-head
 *        self-attention over the coarse tokens.
 *
 * One application computes (with S = A / max|diag A|, the operator rescaled
 * to O(1) entries so token magnitudes do not grow with resolution, and
 * nu = ||r||_2 / sqrt(n), the RMS residual, so the whole map is positively
 * homogeneous — M(a r) = a M(r) — with per-entry feature scale independent
 * of the grid size)
 *   z0   = relax(0, r, pre_relax)
 *   r'   = (r - A z0) / nu
 *   x^f  = relu(features(r') W_lift + b_lift)
 *   E    = masked column softmax of (x^f W_score) / tau
 *   x^c  = E^T (S x^f)
 *   x^c' = x^c + multi_head_attention(x^c)
 *   x^f' = x^f + S (E x^c')
 *   z1   = z0 + nu * (x^f' W_project + b_project)
 *   z    = relax(z1, r, post_relax)
 * with relax(z, r, s) doing s sweeps of z += damping * D^{-1} (r - A z)
 * where the damping scalar is itself a trained parameter. W_project starts
 * at zero, so a freshly initialized model is exactly its relaxation sweeps
 * and the learned correction fades in during training. A zero residual
 * skips the network, so M(0) = 0 exactly.
 *
 * Node features are the residual value, the diagonal entry and absolute row
 * sum (both normalized by the max diagonal so they are O(1) at every
 * resolution), and the normalized grid coordinates. Parameter shapes depend
 * only on the configuration, never on the grid size, so one checkpoint
 * applies across resolutions.
 *
 * Coarse token j anchors at fine index floor((j+0.5) n / m); its support is
 * every node within the smallest graph radius >= 2 of the anchor (in the
 * sparsity graph of A) that lets the supports jointly cover all fine nodes.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "npsolve/autodiff.hpp"
#include "npsolve/csr.hpp"
#include "npsolve/pde.hpp"
#include "npsolve/preconditioner.hpp"

namespace npsolve {

struct NamgConfig {
  int feature_width = 32;  // token width C
  int num_coarse = 128;    // coarse tokens m
  int num_heads = 4;
  int pre_relax = 1;
  int post_relax = 1;
  double init_damping = 2.0 / 3.0;
  /// Score temperature; 0 selects the default sqrt(feature_width).
  double temperature = 0.0;
  /// Drops the matrix-derived feature channels (diagonal, row sum).
  bool use_matrix_features = true;
  /// Skips the network entirely; apply reduces to the relaxation sweeps.
  bool bypass_network = false;

  double tau() const;
  void validate() const;
};

struct NamedParam {
  std::string name;
  ad::Shape shape;
  std::vector<double> value;
};

class NamgModel {
 public:
  /// Fresh model with seeded initialization: weights uniform on
  /// +-1/sqrt(fan_in), biases zero, and the lift columns of every
  /// non-residual feature channel zero so the zero residual maps to zero.
  NamgModel(const NamgConfig& cfg, int grid_dims, std::uint64_t seed);

  const NamgConfig& config() const { return cfg_; }
  int grid_dims() const { return grid_dims_; }
  /// Feature channels per node: residual, optional (diagonal, row sum),
  /// grid_dims coordinates.
  int num_features() const;

  const std::vector<NamedParam>& params() const { return params_; }
  std::vector<NamedParam>& params() { return params_; }

  std::size_t num_scalars() const;
  std::vector<double> flat_params() const;
  void set_flat_params(const std::vector<double>& flat);

 private:
  NamgConfig cfg_;
  int grid_dims_ = 1;
  std::vector<NamedParam> params_;
};

/// Per-system constants: static feature channels, relaxation diagonal and
/// the restriction support mask. Must outlive any tape recorded against it.
struct NamgWorkspace {
  const CsrMatrix* A = nullptr;
  int n = 0;
  std::vector<double> static_features;  // n x (num_features - 1), row-major
  std::vector<double> inv_diag;         // n
  std::vector<std::uint8_t> mask;       // n x num_coarse, row-major
  int support_radius = 0;
  double op_scale = 1.0;  // max |diagonal|; the token path applies A/op_scale
};

NamgWorkspace build_workspace(const NamgModel& model, const CsrMatrix& A,
                              const GridSpec& grid);

/// The model's parameters as tape leaves, in params() order.
std::vector<ad::Tensor> params_on_tape(ad::Tape& tape, const NamgModel& model,
                                       bool requires_grad);

/// Differentiable application; r enters as a constant.
ad::Tensor apply_namg(ad::Tape& tape, const NamgModel& model,
                      const std::vector<ad::Tensor>& param_leaves,
                      const NamgWorkspace& ws, const DenseVector& r);

/// Plain evaluation (non-recording tape); bitwise equal to the recorded
/// forward values.
DenseVector apply_namg(const NamgModel& model, const NamgWorkspace& ws,
                       const DenseVector& r);

class NamgPreconditioner final : public Preconditioner {
 public:
  NamgPreconditioner(NamgModel model, const CsrMatrix& A,
                     const GridSpec& grid);
  DenseVector apply(const DenseVector& r) const override;
  /// The relu/softmax stages make the full network nonlinear in r; only the
  /// bypassed configuration is a fixed linear map.
  bool is_linear() const override { return model_.config().bypass_network; }
  std::string name() const override { return "namg"; }
  const NamgModel& model() const { return model_; }

 private:
  NamgModel model_;
  NamgWorkspace ws_;
};

/// Binary checkpoint, layout documented in docs/checkpoint_format.md.
void save_checkpoint(const NamgModel& model, const std::string& path);
NamgModel load_checkpoint(const std::string& path);

}  // namespace npsolve
