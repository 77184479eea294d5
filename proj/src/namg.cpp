#include "npsolve/namg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <stdexcept>

#include "npsolve/io.hpp"
#include "npsolve/rng.hpp"

namespace npsolve {

double NamgConfig::tau() const {
  return temperature > 0.0 ? temperature
                           : std::sqrt(static_cast<double>(feature_width));
}

void NamgConfig::validate() const {
  if (feature_width < 1) throw std::invalid_argument("feature_width must be positive");
  if (num_coarse < 1) throw std::invalid_argument("num_coarse must be positive");
  if (num_heads < 1) throw std::invalid_argument("num_heads must be positive");
  if (feature_width % num_heads != 0)
    throw std::invalid_argument("feature_width must be divisible by num_heads");
  if (pre_relax < 0 || post_relax < 0)
    throw std::invalid_argument("relaxation sweep counts must be nonnegative");
  if (!(init_damping > 0.0) || init_damping > 1.0)
    throw std::invalid_argument("init_damping must lie in (0, 1]");
  if (temperature < 0.0) throw std::invalid_argument("temperature must be nonnegative");
}

namespace {

std::vector<double> uniform_init(Rng& rng, int rows, int cols, int fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(static_cast<std::size_t>(rows) * cols);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return v;
}

}  // namespace

NamgModel::NamgModel(const NamgConfig& cfg, int grid_dims, std::uint64_t seed)
    : cfg_(cfg), grid_dims_(grid_dims) {
  cfg_.validate();
  if (grid_dims != 1 && grid_dims != 2)
    throw std::invalid_argument("grid_dims must be 1 or 2");

  const int F = num_features();
  const int C = cfg_.feature_width;
  const int m = cfg_.num_coarse;
  Rng rng(seed);

  // The lift keeps only the residual channel active at initialization so a
  // zero residual maps to a zero correction; the static channels train away
  // from zero.
  std::vector<double> lift(static_cast<std::size_t>(F) * C, 0.0);
  {
    const double bound = 1.0 / std::sqrt(static_cast<double>(F));
    for (int c = 0; c < C; ++c) lift[c] = rng.uniform(-bound, bound);
  }
  params_.push_back({"lift_weight", {F, C}, std::move(lift)});
  params_.push_back({"lift_bias", {1, C}, std::vector<double>(C, 0.0)});
  params_.push_back({"score_weight", {C, m}, uniform_init(rng, C, m, C)});
  params_.push_back({"attn_query", {C, C}, uniform_init(rng, C, C, C)});
  params_.push_back({"attn_key", {C, C}, uniform_init(rng, C, C, C)});
  params_.push_back({"attn_value", {C, C}, uniform_init(rng, C, C, C)});
  // Zero-initialized final projection: the fresh model applies exactly its
  // relaxation sweeps, and the network fades in as this layer trains.
  params_.push_back({"project_weight", {C, 1}, std::vector<double>(C, 0.0)});
  params_.push_back({"project_bias", {1, 1}, std::vector<double>(1, 0.0)});
  params_.push_back({"damping", {1, 1}, std::vector<double>(1, cfg_.init_damping)});
}

int NamgModel::num_features() const {
  return 1 + (cfg_.use_matrix_features ? 2 : 0) + grid_dims_;
}

std::size_t NamgModel::num_scalars() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

std::vector<double> NamgModel::flat_params() const {
  std::vector<double> flat;
  flat.reserve(num_scalars());
  for (const auto& p : params_) flat.insert(flat.end(), p.value.begin(), p.value.end());
  return flat;
}

void NamgModel::set_flat_params(const std::vector<double>& flat) {
  if (flat.size() != num_scalars())
    throw std::invalid_argument("flat parameter size mismatch");
  std::size_t off = 0;
  for (auto& p : params_) {
    std::copy(flat.begin() + off, flat.begin() + off + p.value.size(),
              p.value.begin());
    off += p.value.size();
  }
}

namespace {

/// Graph distance from every node to its nearest anchor (multi-source BFS
/// over the sparsity pattern). -1 marks unreachable nodes.
std::vector<int> distance_to_anchors(const CsrMatrix& A,
                                     const std::vector<int>& anchors) {
  const int n = A.n_rows();
  std::vector<int> dist(n, -1);
  std::deque<int> queue;
  for (int a : anchors) {
    if (dist[a] != 0) {
      dist[a] = 0;
      queue.push_back(a);
    }
  }
  const auto& offs = A.row_offsets();
  const auto& cols = A.col_indices();
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (std::int64_t k = offs[u]; k < offs[u + 1]; ++k) {
      const int v = cols[k];
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

/// Marks every node within graph radius of the anchor in column `col` of the
/// row-major n x m mask.
void mark_support(const CsrMatrix& A, int anchor, int radius, int col, int m,
                  std::vector<std::uint8_t>& mask, std::vector<int>& dist,
                  std::vector<int>& touched) {
  touched.clear();
  dist[anchor] = 0;
  touched.push_back(anchor);
  std::deque<int> queue{anchor};
  const auto& offs = A.row_offsets();
  const auto& cols = A.col_indices();
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    mask[static_cast<std::size_t>(u) * m + col] = 1;
    if (dist[u] == radius) continue;
    for (std::int64_t k = offs[u]; k < offs[u + 1]; ++k) {
      const int v = cols[k];
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        touched.push_back(v);
        queue.push_back(v);
      }
    }
  }
  for (int t : touched) dist[t] = -1;
}

}  // namespace

NamgWorkspace build_workspace(const NamgModel& model, const CsrMatrix& A,
                              const GridSpec& grid) {
  grid.validate();
  if (grid.dims != model.grid_dims())
    throw std::invalid_argument("grid dimensionality does not match the model");
  const int n = A.n_rows();
  if (n != A.n_cols()) throw std::invalid_argument("matrix must be square");
  if (n % grid.num_nodes() != 0)
    throw std::invalid_argument("matrix size is not a multiple of the node count");
  const int dofs = n / grid.num_nodes();
  const int m = model.config().num_coarse;

  NamgWorkspace ws;
  ws.A = &A;
  ws.n = n;

  // Static feature channels, O(1) at every resolution.
  const DenseVector diag = A.diagonal();
  double max_diag = 0.0;
  for (double d : diag) max_diag = std::max(max_diag, std::abs(d));
  if (max_diag == 0.0) throw std::invalid_argument("matrix has an all-zero diagonal");
  ws.op_scale = max_diag;

  ws.inv_diag.resize(n);
  for (int i = 0; i < n; ++i) {
    if (diag[i] == 0.0)
      throw std::invalid_argument("zero diagonal entry blocks Jacobi relaxation");
    ws.inv_diag[i] = 1.0 / diag[i];
  }

  const int F = model.num_features();
  const int num_static = F - 1;
  ws.static_features.assign(static_cast<std::size_t>(n) * num_static, 0.0);
  const auto& offs = A.row_offsets();
  const auto& vals = A.values();
  for (int i = 0; i < n; ++i) {
    double* row = &ws.static_features[static_cast<std::size_t>(i) * num_static];
    int c = 0;
    if (model.config().use_matrix_features) {
      double rowsum = 0.0;
      for (std::int64_t k = offs[i]; k < offs[i + 1]; ++k) rowsum += std::abs(vals[k]);
      row[c++] = diag[i] / max_diag;
      row[c++] = rowsum / max_diag;
    }
    const int node = i / dofs;
    if (grid.dims == 1) {
      row[c++] = static_cast<double>(node + 1) / (grid.sizes[0] + 1);
    } else {
      const int nx = grid.sizes[0];
      const int ny = grid.sizes[1];
      row[c++] = static_cast<double>(node % nx + 1) / (nx + 1);
      row[c++] = static_cast<double>(node / nx + 1) / (ny + 1);
    }
  }

  // Anchors stride the fine index range; the support radius is the smallest
  // value >= 2 whose balls around the anchors cover every node.
  std::vector<int> anchors(m);
  for (int j = 0; j < m; ++j) {
    anchors[j] = static_cast<int>((j + 0.5) * static_cast<double>(n) / m);
    anchors[j] = std::min(anchors[j], n - 1);
  }
  const std::vector<int> nearest = distance_to_anchors(A, anchors);
  int radius = 2;
  for (int d : nearest) {
    if (d < 0)
      throw std::invalid_argument("matrix graph is disconnected; coarse supports cannot cover it");
    radius = std::max(radius, d);
  }
  ws.support_radius = radius;

  ws.mask.assign(static_cast<std::size_t>(n) * m, 0);
  std::vector<int> dist(n, -1);
  std::vector<int> touched;
  for (int j = 0; j < m; ++j)
    mark_support(A, anchors[j], radius, j, m, ws.mask, dist, touched);

  return ws;
}

std::vector<ad::Tensor> params_on_tape(ad::Tape& tape, const NamgModel& model,
                                       bool requires_grad) {
  std::vector<ad::Tensor> leaves;
  leaves.reserve(model.params().size());
  for (const auto& p : model.params())
    leaves.push_back(tape.input(p.shape, p.value, requires_grad));
  return leaves;
}

namespace {

enum ParamIndex {
  kLiftW = 0,
  kLiftB,
  kScoreW,
  kAttnQ,
  kAttnK,
  kAttnV,
  kProjW,
  kProjB,
  kDamping,
};

}  // namespace

ad::Tensor apply_namg(ad::Tape& tape, const NamgModel& model,
                      const std::vector<ad::Tensor>& param_leaves,
                      const NamgWorkspace& ws, const DenseVector& r) {
  if (param_leaves.size() != model.params().size())
    throw std::invalid_argument("parameter leaf count mismatch");
  const int n = ws.n;
  if (static_cast<int>(r.size()) != n)
    throw std::invalid_argument("residual size does not match the workspace");
  const NamgConfig& cfg = model.config();
  const CsrMatrix& A = *ws.A;

  const ad::Tensor r_in = tape.input({n, 1}, r);
  const ad::Tensor invd = tape.input({n, 1}, ws.inv_diag);
  const ad::Tensor damping = param_leaves[kDamping];

  auto relax = [&](ad::Tensor z, int sweeps) {
    for (int s = 0; s < sweeps; ++s) {
      ad::Tensor d = tape.sub(r_in, tape.spmv_cols(A, z));
      d = tape.hadamard(d, invd);
      d = tape.scale_by(d, damping);
      z = tape.add(z, d);
    }
    return z;
  };

  ad::Tensor z = relax(tape.input({n, 1}, std::vector<double>(n, 0.0)),
                       cfg.pre_relax);
  if (cfg.bypass_network) return relax(z, cfg.post_relax);

  // The network path is made positively homogeneous of degree one: the
  // residual channel is normalized by the RMS residual and the correction is
  // scaled back, so M(alpha r) = alpha M(r) for alpha > 0 no matter what the
  // bias and static channels learn. Without this, near-converged training
  // snapshots see an r-independent correction whose penalty drives the
  // network toward zero. RMS rather than the plain norm keeps the per-entry
  // feature scale O(1) at every resolution, which is what lets a model
  // trained on one grid transfer to finer ones.
  const double nu = norm2(r) / std::sqrt(static_cast<double>(n));
  if (nu == 0.0) return relax(z, cfg.post_relax);

  // Lift the post-relaxation residual and the static channels to tokens.
  const ad::Tensor r_net =
      tape.scale(tape.sub(r_in, tape.spmv_cols(A, z)), 1.0 / nu);
  const ad::Tensor feats = tape.concat_cols(
      r_net, tape.input({n, model.num_features() - 1}, ws.static_features));
  const ad::Tensor xf = tape.relu(tape.add_rowvec(
      tape.matmul(feats, param_leaves[kLiftW]), param_leaves[kLiftB]));

  // Restriction weights: a probability distribution over each coarse
  // token's support.
  const ad::Tensor scores =
      tape.scale(tape.matmul(xf, param_leaves[kScoreW]), 1.0 / cfg.tau());
  const ad::Tensor E = tape.masked_colwise_softmax(scores, ws.mask);

  // The token path sees A / op_scale so magnitudes stay O(1) as the mesh
  // refines; relaxation and the outer residual always use A itself.
  const ad::Tensor xc = tape.matmul(
      E, tape.scale(tape.spmv_cols(A, xf), 1.0 / ws.op_scale), true, false);

  // Multi-head self-attention over the coarse tokens, residual connection.
  const ad::Tensor q = tape.matmul(xc, param_leaves[kAttnQ]);
  const ad::Tensor k = tape.matmul(xc, param_leaves[kAttnK]);
  const ad::Tensor v = tape.matmul(xc, param_leaves[kAttnV]);
  const int head_dim = cfg.feature_width / cfg.num_heads;
  ad::Tensor heads;
  for (int h = 0; h < cfg.num_heads; ++h) {
    const int lo = h * head_dim;
    const int hi = lo + head_dim;
    const ad::Tensor att = tape.rowwise_softmax(
        tape.matmul(tape.slice_cols(q, lo, hi), tape.slice_cols(k, lo, hi),
                    false, true),
        std::sqrt(static_cast<double>(cfg.feature_width)));
    const ad::Tensor oh = tape.matmul(att, tape.slice_cols(v, lo, hi));
    heads = h == 0 ? oh : tape.concat_cols(heads, oh);
  }
  const ad::Tensor xc2 = tape.add(xc, heads);

  // Prolong through the same weights, project to a correction per node.
  const ad::Tensor xf2 = tape.add(
      xf, tape.scale(tape.spmv_cols(A, tape.matmul(E, xc2)), 1.0 / ws.op_scale));
  const ad::Tensor delta = tape.scale(
      tape.add_rowvec(tape.matmul(xf2, param_leaves[kProjW]),
                      param_leaves[kProjB]),
      nu);

  return relax(tape.add(z, delta), cfg.post_relax);
}

DenseVector apply_namg(const NamgModel& model, const NamgWorkspace& ws,
                       const DenseVector& r) {
  ad::Tape tape(false);
  const std::vector<ad::Tensor> leaves = params_on_tape(tape, model, false);
  return apply_namg(tape, model, leaves, ws, r).value();
}

NamgPreconditioner::NamgPreconditioner(NamgModel model, const CsrMatrix& A,
                                       const GridSpec& grid)
    : model_(std::move(model)), ws_(build_workspace(model_, A, grid)) {}

DenseVector NamgPreconditioner::apply(const DenseVector& r) const {
  return apply_namg(model_, ws_, r);
}

namespace {

constexpr char kMagic[8] = {'N', 'P', 'A', 'M', 'G', '0', '0', '1'};

template <typename T>
void append_raw(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(const std::string& buf, std::size_t& off) {
  if (off + sizeof(T) > buf.size())
    throw std::runtime_error("truncated checkpoint file");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

void save_checkpoint(const NamgModel& model, const std::string& path) {
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  const NamgConfig& cfg = model.config();
  append_raw(buf, static_cast<std::int32_t>(cfg.feature_width));
  append_raw(buf, static_cast<std::int32_t>(cfg.num_coarse));
  append_raw(buf, static_cast<std::int32_t>(cfg.num_heads));
  append_raw(buf, static_cast<std::int32_t>(cfg.pre_relax));
  append_raw(buf, static_cast<std::int32_t>(cfg.post_relax));
  append_raw(buf, static_cast<std::int32_t>(model.grid_dims()));
  append_raw(buf, cfg.init_damping);
  append_raw(buf, cfg.temperature);
  append_raw(buf, static_cast<std::uint8_t>(cfg.use_matrix_features ? 1 : 0));
  append_raw(buf, static_cast<std::uint8_t>(cfg.bypass_network ? 1 : 0));
  append_raw(buf, static_cast<std::uint32_t>(model.params().size()));
  for (const auto& p : model.params()) {
    append_raw(buf, static_cast<std::uint32_t>(p.name.size()));
    buf.append(p.name);
    append_raw(buf, static_cast<std::int32_t>(p.shape.rows));
    append_raw(buf, static_cast<std::int32_t>(p.shape.cols));
    buf.append(reinterpret_cast<const char*>(p.value.data()),
               p.value.size() * sizeof(double));
  }
  write_file_atomic(path, buf);
}

NamgModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  std::size_t off = 0;
  if (buf.size() < sizeof(kMagic) ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  off = sizeof(kMagic);

  NamgConfig cfg;
  cfg.feature_width = read_raw<std::int32_t>(buf, off);
  cfg.num_coarse = read_raw<std::int32_t>(buf, off);
  cfg.num_heads = read_raw<std::int32_t>(buf, off);
  cfg.pre_relax = read_raw<std::int32_t>(buf, off);
  cfg.post_relax = read_raw<std::int32_t>(buf, off);
  const int grid_dims = read_raw<std::int32_t>(buf, off);
  cfg.init_damping = read_raw<double>(buf, off);
  cfg.temperature = read_raw<double>(buf, off);
  cfg.use_matrix_features = read_raw<std::uint8_t>(buf, off) != 0;
  cfg.bypass_network = read_raw<std::uint8_t>(buf, off) != 0;

  NamgModel model(cfg, grid_dims, /*seed=*/0);
  const std::uint32_t count = read_raw<std::uint32_t>(buf, off);
  if (count != model.params().size())
    throw std::runtime_error("checkpoint parameter count mismatch");
  for (auto& p : model.params()) {
    const std::uint32_t name_len = read_raw<std::uint32_t>(buf, off);
    if (off + name_len > buf.size())
      throw std::runtime_error("truncated checkpoint file");
    const std::string name(buf.data() + off, name_len);
    off += name_len;
    if (name != p.name)
      throw std::runtime_error("checkpoint parameter order mismatch: " + name);
    const int rows = read_raw<std::int32_t>(buf, off);
    const int cols = read_raw<std::int32_t>(buf, off);
    if (rows != p.shape.rows || cols != p.shape.cols)
      throw std::runtime_error("checkpoint parameter shape mismatch: " + name);
    const std::size_t bytes = p.value.size() * sizeof(double);
    if (off + bytes > buf.size())
      throw std::runtime_error("truncated checkpoint file");
    std::memcpy(p.value.data(), buf.data() + off, bytes);
    off += bytes;
  }
  if (off != buf.size())
    throw std::runtime_error("trailing bytes in checkpoint file");
  return model;
}

}  // namespace npsolve
