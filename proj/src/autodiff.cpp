#include "npsolve/autodiff.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace npsolve::ad {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

CMapMat cmap(const std::vector<double>& v, Shape s) {
  return CMapMat(v.data(), s.rows, s.cols);
}
MapMat mmap(std::vector<double>& v, Shape s) {
  return MapMat(v.data(), s.rows, s.cols);
}

}  // namespace

Shape Tensor::shape() const {
  if (!valid()) throw std::logic_error("Tensor: empty handle");
  return tape_->node(*this).shape;
}
const std::vector<double>& Tensor::value() const {
  if (!valid()) throw std::logic_error("Tensor: empty handle");
  return tape_->node(*this).val;
}
const std::vector<double>& Tensor::grad() const {
  if (!valid()) throw std::logic_error("Tensor: empty handle");
  const auto& n = tape_->node(*this);
  if (!n.requires_grad)
    throw std::logic_error("Tensor: gradient requested for a non-grad node");
  return n.grad;
}

Tape::Node& Tape::node(const Tensor& t) { return nodes_[t.id_]; }
const Tape::Node& Tape::node(const Tensor& t) const { return nodes_[t.id_]; }

void Tape::check_mine(const Tensor& t) const {
  if (!t.valid() || t.tape_ != this || t.id_ < 0 ||
      t.id_ >= static_cast<int>(nodes_.size()))
    throw std::logic_error("Tape: tensor does not belong to this tape");
}

void Tape::ensure_grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty())
    n.grad.assign(static_cast<std::size_t>(n.shape.size()), 0.0);
}

Tensor Tape::make(Shape shape, std::vector<double> values, bool requires_grad,
                  std::function<void(Tape&)> back) {
  if (static_cast<int>(values.size()) != shape.size())
    throw std::invalid_argument("Tape: value size does not match shape");
  Node n;
  n.shape = shape;
  n.val = std::move(values);
  n.requires_grad = requires_grad;
  if (requires_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::input(Shape shape, std::vector<double> values,
                   bool requires_grad) {
  return make(shape, std::move(values), recording_ && requires_grad, nullptr);
}

// Closures capture node ids, never references: nodes_ may reallocate between
// recording and backward, so nodes are re-fetched through the tape at call
// time. The output node id is known before make() appends it.

Tensor Tape::add(Tensor a, Tensor b) {
  check_mine(a);
  check_mine(b);
  if (!(node(a).shape == node(b).shape))
    throw std::invalid_argument("add: shape mismatch");
  Shape s = node(a).shape;
  std::vector<double> out(node(a).val);
  const auto& bv = node(b).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  bool rg = recording_ && (node(a).requires_grad || node(b).requires_grad);
  int ia = a.id_, ib = b.id_, io = num_nodes();
  return make(s, std::move(out), rg, [ia, ib, io](Tape& t) {
    const auto& g = t.nodes_[io].grad;
    for (int src : {ia, ib}) {
      if (!t.nodes_[src].requires_grad) continue;
      t.ensure_grad(src);
      auto& gs = t.nodes_[src].grad;
      for (std::size_t i = 0; i < g.size(); ++i) gs[i] += g[i];
    }
  });
}

Tensor Tape::sub(Tensor a, Tensor b) {
  check_mine(a);
  check_mine(b);
  if (!(node(a).shape == node(b).shape))
    throw std::invalid_argument("sub: shape mismatch");
  Shape s = node(a).shape;
  std::vector<double> out(node(a).val);
  const auto& bv = node(b).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  bool rg = recording_ && (node(a).requires_grad || node(b).requires_grad);
  int ia = a.id_, ib = b.id_, io = num_nodes();
  return make(s, std::move(out), rg, [ia, ib, io](Tape& t) {
    const auto& g = t.nodes_[io].grad;
    if (t.nodes_[ia].requires_grad) {
      t.ensure_grad(ia);
      auto& ga = t.nodes_[ia].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.nodes_[ib].requires_grad) {
      t.ensure_grad(ib);
      auto& gb = t.nodes_[ib].grad;
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Tensor Tape::hadamard(Tensor a, Tensor b) {
  check_mine(a);
  check_mine(b);
  if (!(node(a).shape == node(b).shape))
    throw std::invalid_argument("hadamard: shape mismatch");
  Shape s = node(a).shape;
  std::vector<double> out(node(a).val);
  const auto& bv = node(b).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  bool rg = recording_ && (node(a).requires_grad || node(b).requires_grad);
  int ia = a.id_, ib = b.id_, io = num_nodes();
  return make(s, std::move(out), rg, [ia, ib, io](Tape& t) {
    const auto& g = t.nodes_[io].grad;
    if (t.nodes_[ia].requires_grad) {
      t.ensure_grad(ia);
      auto& ga = t.nodes_[ia].grad;
      const auto& bval = t.nodes_[ib].val;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bval[i];
    }
    if (t.nodes_[ib].requires_grad) {
      t.ensure_grad(ib);
      auto& gb = t.nodes_[ib].grad;
      const auto& aval = t.nodes_[ia].val;
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * aval[i];
    }
  });
}

Tensor Tape::scale(Tensor a, double c) {
  check_mine(a);
  Shape s = node(a).shape;
  std::vector<double> out(node(a).val);
  for (double& x : out) x *= c;
  bool rg = recording_ && node(a).requires_grad;
  int ia = a.id_, io = num_nodes();
  return make(s, std::move(out), rg, [ia, io, c](Tape& t) {
    if (!t.nodes_[ia].requires_grad) return;
    t.ensure_grad(ia);
    const auto& g = t.nodes_[io].grad;
    auto& ga = t.nodes_[ia].grad;
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Tensor Tape::scale_by(Tensor a, Tensor s) {
  check_mine(a);
  check_mine(s);
  if (!(node(s).shape == Shape{1, 1}))
    throw std::invalid_argument("scale_by: scalar must be 1x1");
  Shape sh = node(a).shape;
  double c = node(s).val[0];
  std::vector<double> out(node(a).val);
  for (double& x : out) x *= c;
  bool rg = recording_ && (node(a).requires_grad || node(s).requires_grad);
  int ia = a.id_, is = s.id_, io = num_nodes();
  return make(sh, std::move(out), rg, [ia, is, io](Tape& t) {
    const auto& g = t.nodes_[io].grad;
    double cval = t.nodes_[is].val[0];
    if (t.nodes_[ia].requires_grad) {
      t.ensure_grad(ia);
      auto& ga = t.nodes_[ia].grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += cval * g[i];
    }
    if (t.nodes_[is].requires_grad) {
      t.ensure_grad(is);
      const auto& aval = t.nodes_[ia].val;
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * aval[i];
      t.nodes_[is].grad[0] += acc;
    }
  });
}

Tensor Tape::matmul(Tensor a, Tensor b, bool transpose_a, bool transpose_b) {
  check_mine(a);
  check_mine(b);
  Shape sa = node(a).shape, sb = node(b).shape;
  int ar = transpose_a ? sa.cols : sa.rows;
  int ac = transpose_a ? sa.rows : sa.cols;
  int br = transpose_b ? sb.cols : sb.rows;
  int bc = transpose_b ? sb.rows : sb.cols;
  if (ac != br) throw std::invalid_argument("matmul: inner dimension mismatch");
  Shape so{ar, bc};
  std::vector<double> out(static_cast<std::size_t>(so.size()));
  {
    CMapMat A = cmap(node(a).val, sa);
    CMapMat B = cmap(node(b).val, sb);
    MapMat C(out.data(), ar, bc);
    if (!transpose_a && !transpose_b) C.noalias() = A * B;
    else if (transpose_a && !transpose_b) C.noalias() = A.transpose() * B;
    else if (!transpose_a && transpose_b) C.noalias() = A * B.transpose();
    else C.noalias() = A.transpose() * B.transpose();
  }
  bool rg = recording_ && (node(a).requires_grad || node(b).requires_grad);
  int ia = a.id_, ib = b.id_, io = num_nodes();
  bool ta = transpose_a, tb = transpose_b;
  return make(so, std::move(out), rg, [ia, ib, io, ta, tb, sa, sb, so](Tape& t) {
    CMapMat G = cmap(t.nodes_[io].grad, so);
    if (t.nodes_[ia].requires_grad) {
      t.ensure_grad(ia);
      MapMat GA = mmap(t.nodes_[ia].grad, sa);
      CMapMat B = cmap(t.nodes_[ib].val, sb);
      // d/dA of C = op(A) op(B): chain through the transposes.
      if (!ta && !tb) GA.noalias() += G * B.transpose();
      else if (!ta && tb) GA.noalias() += G * B;
      else if (ta && !tb) GA.noalias() += B * G.transpose();
      else GA.noalias() += B.transpose() * G.transpose();
    }
    if (t.nodes_[ib].requires_grad) {
      t.ensure_grad(ib);
      MapMat GB = mmap(t.nodes_[ib].grad, sb);
      CMapMat A = cmap(t.nodes_[ia].val, sa);
      if (!ta && !tb) GB.noalias() += A.transpose() * G;
      else if (!ta && tb) GB.noalias() += G.transpose() * A;
      else if (ta && !tb) GB.noalias() += A * G;
      else GB.noalias() += G.transpose() * A.transpose();
    }
  });
}

Tensor Tape::spmv_cols(const CsrMatrix& A, Tensor x) {
  check_mine(x);
  Shape sx = node(x).shape;
  if (sx.rows != A.n_cols())
    throw std::invalid_argument("spmv_cols: dimension mismatch");
  int c = sx.cols;
  Shape so{A.n_rows(), c};
  std::vector<double> out(static_cast<std::size_t>(so.size()), 0.0);
  const auto& off = A.row_offsets();
  const auto& col = A.col_indices();
  const auto& val = A.values();
  const auto& xv = node(x).val;
  for (int i = 0; i < A.n_rows(); ++i) {
    double* dst = out.data() + static_cast<std::size_t>(i) * c;
    for (std::int64_t k = off[i]; k < off[i + 1]; ++k) {
      const double* src = xv.data() + static_cast<std::size_t>(col[k]) * c;
      double v = val[k];
      for (int q = 0; q < c; ++q) dst[q] += v * src[q];
    }
  }
  bool rg = recording_ && node(x).requires_grad;
  int ix = x.id_, io = num_nodes();
  const CsrMatrix* Ap = &A;  // caller guarantees A outlives the tape
  return make(so, std::move(out), rg, [ix, io, Ap, c](Tape& t) {
    if (!t.nodes_[ix].requires_grad) return;
    t.ensure_grad(ix);
    const auto& g = t.nodes_[io].grad;
    auto& gx = t.nodes_[ix].grad;
    const auto& off2 = Ap->row_offsets();
    const auto& col2 = Ap->col_indices();
    const auto& val2 = Ap->values();
    // gx += A^T g
    for (int i = 0; i < Ap->n_rows(); ++i) {
      const double* grow = g.data() + static_cast<std::size_t>(i) * c;
      for (std::int64_t k = off2[i]; k < off2[i + 1]; ++k) {
        double* dst = gx.data() + static_cast<std::size_t>(col2[k]) * c;
        double v = val2[k];
        for (int q = 0; q < c; ++q) dst[q] += v * grow[q];
      }
    }
  });
}

Tensor Tape::rowwise_softmax(Tensor x, double temperature) {
  check_mine(x);
  if (!(temperature > 0.0))
    throw std::invalid_argument("rowwise_softmax: temperature must be > 0");
  Shape s = node(x).shape;
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  const auto& xv = node(x).val;
  for (int i = 0; i < s.rows; ++i) {
    const double* row = xv.data() + static_cast<std::size_t>(i) * s.cols;
    double* orow = out.data() + static_cast<std::size_t>(i) * s.cols;
    // temperature divides the logits, then the max shift stabilizes exp
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < s.cols; ++j) mx = std::max(mx, row[j] / temperature);
    double sum = 0.0;
    for (int j = 0; j < s.cols; ++j) {
      orow[j] = std::exp(row[j] / temperature - mx);
      sum += orow[j];
    }
    for (int j = 0; j < s.cols; ++j) orow[j] /= sum;
  }
  bool rg = recording_ && node(x).requires_grad;
  int ix = x.id_, io = num_nodes();
  return make(s, std::move(out), rg, [ix, io, s, temperature](Tape& t) {
    if (!t.nodes_[ix].requires_grad) return;
    t.ensure_grad(ix);
    const auto& g = t.nodes_[io].grad;
    const auto& sv = t.nodes_[io].val;
    auto& gx = t.nodes_[ix].grad;
    for (int i = 0; i < s.rows; ++i) {
      std::size_t base = static_cast<std::size_t>(i) * s.cols;
      double gs = 0.0;
      for (int j = 0; j < s.cols; ++j) gs += g[base + j] * sv[base + j];
      for (int j = 0; j < s.cols; ++j)
        gx[base + j] += sv[base + j] * (g[base + j] - gs) / temperature;
    }
  });
}

Tensor Tape::masked_colwise_softmax(Tensor scores,
                                    const std::vector<std::uint8_t>& mask) {
  check_mine(scores);
  Shape s = node(scores).shape;
  if (static_cast<int>(mask.size()) != s.size())
    throw std::invalid_argument("masked_colwise_softmax: mask size mismatch");
  std::vector<double> out(static_cast<std::size_t>(s.size()), 0.0);
  const auto& xv = node(scores).val;
  for (int j = 0; j < s.cols; ++j) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.rows; ++i)
      if (mask[static_cast<std::size_t>(i) * s.cols + j])
        mx = std::max(mx, xv[static_cast<std::size_t>(i) * s.cols + j]);
    if (mx == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument(
          "masked_colwise_softmax: column with empty support");
    double sum = 0.0;
    for (int i = 0; i < s.rows; ++i) {
      std::size_t k = static_cast<std::size_t>(i) * s.cols + j;
      if (mask[k]) {
        out[k] = std::exp(xv[k] - mx);
        sum += out[k];
      }
    }
    for (int i = 0; i < s.rows; ++i) {
      std::size_t k = static_cast<std::size_t>(i) * s.cols + j;
      if (mask[k]) out[k] /= sum;
    }
  }
  bool rg = recording_ && node(scores).requires_grad;
  int ix = scores.id_, io = num_nodes();
  const std::vector<std::uint8_t>* mp = &mask;  // must outlive the tape
  return make(s, std::move(out), rg, [ix, io, s, mp](Tape& t) {
    if (!t.nodes_[ix].requires_grad) return;
    t.ensure_grad(ix);
    const auto& g = t.nodes_[io].grad;
    const auto& sv = t.nodes_[io].val;
    auto& gx = t.nodes_[ix].grad;
    for (int j = 0; j < s.cols; ++j) {
      double gs = 0.0;
      for (int i = 0; i < s.rows; ++i) {
        std::size_t k = static_cast<std::size_t>(i) * s.cols + j;
        if ((*mp)[k]) gs += g[k] * sv[k];
      }
      for (int i = 0; i < s.rows; ++i) {
        std::size_t k = static_cast<std::size_t>(i) * s.cols + j;
        if ((*mp)[k]) gx[k] += sv[k] * (g[k] - gs);
      }
    }
  });
}

Tensor Tape::relu(Tensor x) {
  check_mine(x);
  Shape s = node(x).shape;
  std::vector<double> out(node(x).val);
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  bool rg = recording_ && node(x).requires_grad;
  int ix = x.id_, io = num_nodes();
  return make(s, std::move(out), rg, [ix, io](Tape& t) {
    if (!t.nodes_[ix].requires_grad) return;
    t.ensure_grad(ix);
    const auto& g = t.nodes_[io].grad;
    const auto& xval = t.nodes_[ix].val;
    auto& gx = t.nodes_[ix].grad;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xval[i] > 0.0) gx[i] += g[i];
  });
}

Tensor Tape::concat_cols(Tensor a, Tensor b) {
  check_mine(a);
  check_mine(b);
  Shape sa = node(a).shape, sb = node(b).shape;
  if (sa.rows != sb.rows)
    throw std::invalid_argument("concat_cols: row count mismatch");
  Shape so{sa.rows, sa.cols + sb.cols};
  std::vector<double> out(static_cast<std::size_t>(so.size()));
  const auto& av = node(a).val;
  const auto& bv = node(b).val;
  for (int i = 0; i < so.rows; ++i) {
    std::copy_n(av.data() + static_cast<std::size_t>(i) * sa.cols, sa.cols,
                out.data() + static_cast<std::size_t>(i) * so.cols);
    std::copy_n(bv.data() + static_cast<std::size_t>(i) * sb.cols, sb.cols,
                out.data() + static_cast<std::size_t>(i) * so.cols + sa.cols);
  }
  bool rg = recording_ && (node(a).requires_grad || node(b).requires_grad);
  int ia = a.id_, ib = b.id_, io = num_nodes();
  return make(so, std::move(out), rg, [ia, ib, io, sa, sb, so](Tape& t) {
    const auto& g = t.nodes_[io].grad;
    if (t.nodes_[ia].requires_grad) {
      t.ensure_grad(ia);
      auto& ga = t.nodes_[ia].grad;
      for (int i = 0; i < so.rows; ++i)
        for (int j = 0; j < sa.cols; ++j)
          ga[static_cast<std::size_t>(i) * sa.cols + j] +=
              g[static_cast<std::size_t>(i) * so.cols + j];
    }
    if (t.nodes_[ib].requires_grad) {
      t.ensure_grad(ib);
      auto& gb = t.nodes_[ib].grad;
      for (int i = 0; i < so.rows; ++i)
        for (int j = 0; j < sb.cols; ++j)
          gb[static_cast<std::size_t>(i) * sb.cols + j] +=
              g[static_cast<std::size_t>(i) * so.cols + sa.cols + j];
    }
  });
}

Tensor Tape::slice_cols(Tensor x, int col_begin, int col_end) {
  check_mine(x);
  Shape s = node(x).shape;
  if (col_begin < 0 || col_end > s.cols || col_begin >= col_end)
    throw std::invalid_argument("slice_cols: bad column range");
  Shape so{s.rows, col_end - col_begin};
  std::vector<double> out(static_cast<std::size_t>(so.size()));
  const auto& xv = node(x).val;
  for (int i = 0; i < s.rows; ++i)
    std::copy_n(xv.data() + static_cast<std::size_t>(i) * s.cols + col_begin,
                so.cols, out.data() + static_cast<std::size_t>(i) * so.cols);
  bool rg = recording_ && node(x).requires_grad;
  int ix = x.id_, io = num_nodes();
  return make(so, std::move(out), rg, [ix, io, s, so, col_begin](Tape& t) {
    if (!t.nodes_[ix].requires_grad) return;
    t.ensure_grad(ix);
    const auto& g = t.nodes_[io].grad;
    auto& gx = t.nodes_[ix].grad;
    for (int i = 0; i < so.rows; ++i)
      for (int j = 0; j < so.cols; ++j)
        gx[static_cast<std::size_t>(i) * s.cols + col_begin + j] +=
            g[static_cast<std::size_t>(i) * so.cols + j];
  });
}

Tensor Tape::add_rowvec(Tensor x, Tensor bias) {
  check_mine(x);
  check_mine(bias);
  Shape s = node(x).shape, sbias = node(bias).shape;
  if (sbias.rows != 1 || sbias.cols != s.cols)
    throw std::invalid_argument("add_rowvec: bias must be 1 x cols");
  std::vector<double> out(node(x).val);
  const auto& bv = node(bias).val;
  for (int i = 0; i < s.rows; ++i)
    for (int j = 0; j < s.cols; ++j)
      out[static_cast<std::size_t>(i) * s.cols + j] += bv[j];
  bool rg = recording_ && (node(x).requires_grad || node(bias).requires_grad);
  int ix = x.id_, ibias = bias.id_, io = num_nodes();
  return make(s, std::move(out), rg, [ix, ibias, io, s](Tape& t) {
    const auto& g = t.nodes_[io].grad;
    if (t.nodes_[ix].requires_grad) {
      t.ensure_grad(ix);
      auto& gx = t.nodes_[ix].grad;
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (t.nodes_[ibias].requires_grad) {
      t.ensure_grad(ibias);
      auto& gb = t.nodes_[ibias].grad;
      for (int i = 0; i < s.rows; ++i)
        for (int j = 0; j < s.cols; ++j)
          gb[j] += g[static_cast<std::size_t>(i) * s.cols + j];
    }
  });
}

Tensor Tape::sum_squares(Tensor x) {
  check_mine(x);
  double acc = 0.0;
  for (double v : node(x).val) acc += v * v;
  bool rg = recording_ && node(x).requires_grad;
  int ix = x.id_, io = num_nodes();
  return make({1, 1}, {acc}, rg, [ix, io](Tape& t) {
    if (!t.nodes_[ix].requires_grad) return;
    t.ensure_grad(ix);
    double g0 = t.nodes_[io].grad[0];
    const auto& xval = t.nodes_[ix].val;
    auto& gx = t.nodes_[ix].grad;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += 2.0 * xval[i] * g0;
  });
}

Tensor Tape::mean(Tensor x) {
  check_mine(x);
  if (node(x).shape.size() == 0)
    throw std::invalid_argument("mean: empty tensor");
  double acc = 0.0;
  for (double v : node(x).val) acc += v;
  double inv = 1.0 / static_cast<double>(node(x).shape.size());
  acc *= inv;
  bool rg = recording_ && node(x).requires_grad;
  int ix = x.id_, io = num_nodes();
  return make({1, 1}, {acc}, rg, [ix, io, inv](Tape& t) {
    if (!t.nodes_[ix].requires_grad) return;
    t.ensure_grad(ix);
    double g0 = t.nodes_[io].grad[0] * inv;
    auto& gx = t.nodes_[ix].grad;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g0;
  });
}

void Tape::backward(Tensor loss) {
  check_mine(loss);
  if (!recording_)
    throw std::logic_error("backward: tape is not recording");
  if (backward_done_)
    throw std::logic_error(
        "backward: closures were already consumed; record a fresh tape");
  if (!(node(loss).shape == Shape{1, 1}))
    throw std::invalid_argument("backward: loss must be a 1x1 scalar");
  if (!node(loss).requires_grad)
    throw std::invalid_argument(
        "backward: loss does not depend on any requires_grad input");
  // A rejected call must not consume the tape, so the flag flips only after
  // the loss checks out.
  backward_done_ = true;
  for (Node& n : nodes_) n.grad.clear();
  ensure_grad(loss.id_);
  node(loss).grad[0] = 1.0;
  // Reverse recording order is a topological order of the DAG.
  for (int id = loss.id_; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.back) {
      n.back(*this);
      nodes_[id].back = nullptr;  // one-shot; release the closure
    }
    for (double g : nodes_[id].grad)
      if (!std::isfinite(g))
        throw std::runtime_error("backward: non-finite gradient encountered");
  }
}

void AdamState::step(std::vector<double>& params,
                     const std::vector<double>& grads, const AdamConfig& cfg) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("AdamState: size mismatch");
  ++t_;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * grads[i];
    v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    double mhat = m_[i] / bc1;
    double vhat = v_[i] / bc2;
    params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

}  // namespace npsolve::ad
