#pragma once

/**
 * @file autodiff.hpp
 * @brief Minimal reverse-mode automatic differentiation over dense 2D
 *        tensors, plus the sparse-matrix product the preconditioner needs.
 *
 * A Tape owns every tensor created on it; Tensor is a cheap handle (tape
 * pointer + node id). Ops record backward closures in creation order, and
 * backward() replays them in reverse, which is a valid topological order.
 * A tape constructed with recording = false evaluates the same forward
 * values bitwise but records nothing.
 *
 * Sparse matrices enter only as constants (spmv_cols); gradients never flow
 * into matrix entries.
 */

#include <cstdint>
#include <functional>
#include <vector>

#include "npsolve/csr.hpp"

namespace npsolve::ad {

struct Shape {
  int rows = 0;
  int cols = 0;
  int size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

class Tape;

class Tensor {
 public:
  Tensor() = default;
  bool valid() const { return tape_ != nullptr; }
  Shape shape() const;
  const std::vector<double>& value() const;
  /// Gradient of the last backward() with respect to this tensor.
  const std::vector<double>& grad() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }

  /// Leaf tensor. requires_grad leaves accumulate gradients in backward().
  Tensor input(Shape shape, std::vector<double> values,
               bool requires_grad = false);

  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor hadamard(Tensor a, Tensor b);
  Tensor scale(Tensor a, double c);
  /// Multiply by a learnable scalar (shape 1x1).
  Tensor scale_by(Tensor a, Tensor s);
  Tensor matmul(Tensor a, Tensor b, bool transpose_a = false,
                bool transpose_b = false);
  /// out = A X for a constant sparse A; the backward seeds A^T g.
  Tensor spmv_cols(const CsrMatrix& A, Tensor x);
  /// Row-wise softmax of x / temperature, max-subtracted for stability.
  Tensor rowwise_softmax(Tensor x, double temperature);
  /// Column-wise softmax restricted to mask != 0 (row-major n x m mask);
  /// entries outside the mask are exactly zero. Every column needs at least
  /// one active entry.
  Tensor masked_colwise_softmax(Tensor scores,
                                const std::vector<std::uint8_t>& mask);
  Tensor relu(Tensor x);
  Tensor concat_cols(Tensor a, Tensor b);
  Tensor slice_cols(Tensor x, int col_begin, int col_end);
  /// Adds a 1 x cols bias row to every row of x.
  Tensor add_rowvec(Tensor x, Tensor bias);
  Tensor sum_squares(Tensor x);  // 1x1
  Tensor mean(Tensor x);         // 1x1

  /// Reverse sweep from a scalar loss. Gradients of requires_grad leaves are
  /// readable afterwards; the recorded closures are released. Throws on a
  /// non-scalar loss or on non-finite gradients.
  void backward(Tensor loss);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Shape shape;
    std::vector<double> val;
    std::vector<double> grad;
    bool requires_grad = false;
    std::function<void(Tape&)> back;
  };

  friend class Tensor;
  Node& node(const Tensor& t);
  const Node& node(const Tensor& t) const;
  void check_mine(const Tensor& t) const;
  Tensor make(Shape shape, std::vector<double> values, bool requires_grad,
              std::function<void(Tape&)> back);
  void ensure_grad(int id);

  std::vector<Node> nodes_;
  bool recording_;
  bool backward_done_ = false;
};

/// Adam with bias correction over one flat parameter vector.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}
  void step(std::vector<double>& params, const std::vector<double>& grads,
            const AdamConfig& cfg);
  std::int64_t t() const { return t_; }

 private:
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace npsolve::ad
