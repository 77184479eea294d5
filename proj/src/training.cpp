#include "npsolve/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "npsolve/io.hpp"
#include "npsolve/rng.hpp"
#include "npsolve/two_grid.hpp"
#include "npsolve/vec.hpp"

namespace npsolve {

namespace fs = std::filesystem;
using nlohmann::json;

void DatasetConfig::validate() const {
  grid.validate();
  family.validate();
  if (num_samples < 1) throw std::invalid_argument("num_samples must be positive");
  if (!(grf_length_scale > 0.0))
    throw std::invalid_argument("grf_length_scale must be positive");
  if (grf_variance < 0.0)
    throw std::invalid_argument("grf_variance must be nonnegative");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (record_stride < 1) throw std::invalid_argument("record_stride must be positive");
}

DenseVector sample_rhs(const PdeFamily& family, const GridSpec& grid,
                       double length_scale, double variance,
                       std::uint64_t base_seed, int sample_index) {
  const int dofs = family.dofs_per_node();
  const int nodes = grid.num_nodes();
  DenseVector b(static_cast<std::size_t>(dofs) * nodes);
  for (int c = 0; c < dofs; ++c) {
    GrfSpec spec;
    spec.length_scale = length_scale;
    spec.variance = variance;
    spec.seed = base_seed + static_cast<std::uint64_t>(sample_index) * dofs + c;
    const DenseVector field = sample_grf(grid, spec);
    for (int i = 0; i < nodes; ++i) b[static_cast<std::size_t>(i) * dofs + c] = field[i];
  }
  return b;
}

Dataset generate_dataset(const DatasetConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  ds.matrix = assemble(cfg.family, cfg.grid);

  TwoGridPreconditioner M(ds.matrix, cfg.grid, cfg.family.dofs_per_node());
  SolveConfig scfg;
  scfg.tol = cfg.tol;
  scfg.max_iters = cfg.max_iters;
  scfg.record_stride = cfg.record_stride;

  ds.samples.reserve(cfg.num_samples);
  for (int s = 0; s < cfg.num_samples; ++s) {
    TrainSample sample;
    sample.rhs = sample_rhs(cfg.family, cfg.grid, cfg.grf_length_scale,
                            cfg.grf_variance, cfg.seed, s);
    SolveTrace trace = record_dataset(ds.matrix, sample.rhs, M, scfg);
    sample.solution = trace.x;
    sample.snapshots = std::move(trace.snapshots);
    sample.converged = trace.converged;
    sample.iterations = trace.iterations;
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

namespace {

// Doubles travel through the manifest as %.17g strings: exact round-trip and
// no trouble with infinities (a backward-Euler step size may be inf).
std::string num_str(double v) { return format_double(v); }

double str_num(const json& j, const char* key) {
  const std::string s = j.at(key).get<std::string>();
  return std::strtod(s.c_str(), nullptr);
}

std::string sample_dir_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%03d", index);
  return buf;
}

std::string snap_file_name(int index, char which) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snap_%03d_%c.txt", index, which);
  return buf;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  write_matrix(dir + "/matrix.txt", ds.matrix);

  const DatasetConfig& cfg = ds.config;
  json manifest;
  manifest["pde"] = to_string(cfg.family.kind);
  manifest["grid_sizes"] = cfg.grid.sizes;
  manifest["spacing"] = num_str(cfg.grid.spacing);
  manifest["diffusion_coeff"] = num_str(cfg.family.diffusion_coeff);
  manifest["diffusion_contrast"] = num_str(cfg.family.diffusion_contrast);
  manifest["dt"] = num_str(cfg.family.dt);
  manifest["lame_lambda"] = num_str(cfg.family.lame_lambda);
  manifest["lame_mu"] = num_str(cfg.family.lame_mu);
  manifest["num_samples"] = cfg.num_samples;
  manifest["grf_length_scale"] = num_str(cfg.grf_length_scale);
  manifest["grf_variance"] = num_str(cfg.grf_variance);
  manifest["seed"] = cfg.seed;
  manifest["tol"] = num_str(cfg.tol);
  manifest["max_iters"] = cfg.max_iters;
  manifest["record_stride"] = cfg.record_stride;

  json samples = json::array();
  for (std::size_t s = 0; s < ds.samples.size(); ++s) {
    const TrainSample& sample = ds.samples[s];
    const std::string sdir = sample_dir_name(static_cast<int>(s));
    fs::create_directories(fs::path(dir) / sdir);
    write_vector(dir + "/" + sdir + "/rhs.txt", sample.rhs);
    write_vector(dir + "/" + sdir + "/solution.txt", sample.solution);

    json snaps = json::array();
    for (std::size_t k = 0; k < sample.snapshots.size(); ++k) {
      const Snapshot& snap = sample.snapshots[k];
      const std::string xf = snap_file_name(static_cast<int>(k), 'x');
      const std::string rf = snap_file_name(static_cast<int>(k), 'r');
      write_vector(dir + "/" + sdir + "/" + xf, snap.x);
      write_vector(dir + "/" + sdir + "/" + rf, snap.r);
      snaps.push_back({{"iter", snap.k}, {"x", sdir + "/" + xf}, {"r", sdir + "/" + rf}});
    }
    samples.push_back({{"dir", sdir},
                       {"rhs", sdir + "/rhs.txt"},
                       {"solution", sdir + "/solution.txt"},
                       {"converged", sample.converged},
                       {"iterations", sample.iterations},
                       {"snapshots", snaps}});
  }
  manifest["samples"] = samples;
  write_file_atomic(dir + "/manifest.json", manifest.dump(2) + "\n");
}

Dataset read_dataset(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw std::runtime_error("cannot open dataset manifest in " + dir);
  json manifest = json::parse(in);

  Dataset ds;
  DatasetConfig& cfg = ds.config;
  cfg.family.kind = pde_kind_from_string(manifest.at("pde").get<std::string>());
  cfg.grid.sizes = manifest.at("grid_sizes").get<std::vector<int>>();
  cfg.grid.dims = static_cast<int>(cfg.grid.sizes.size());
  cfg.grid.spacing = str_num(manifest, "spacing");
  cfg.family.diffusion_coeff = str_num(manifest, "diffusion_coeff");
  cfg.family.diffusion_contrast = str_num(manifest, "diffusion_contrast");
  cfg.family.dt = str_num(manifest, "dt");
  cfg.family.lame_lambda = str_num(manifest, "lame_lambda");
  cfg.family.lame_mu = str_num(manifest, "lame_mu");
  cfg.num_samples = manifest.at("num_samples").get<int>();
  cfg.grf_length_scale = str_num(manifest, "grf_length_scale");
  cfg.grf_variance = str_num(manifest, "grf_variance");
  cfg.seed = manifest.at("seed").get<std::uint64_t>();
  cfg.tol = str_num(manifest, "tol");
  cfg.max_iters = manifest.at("max_iters").get<int>();
  cfg.record_stride = manifest.at("record_stride").get<int>();

  ds.matrix = read_matrix(dir + "/matrix.txt");

  for (const json& js : manifest.at("samples")) {
    TrainSample sample;
    sample.rhs = read_vector(dir + "/" + js.at("rhs").get<std::string>());
    sample.solution = read_vector(dir + "/" + js.at("solution").get<std::string>());
    sample.converged = js.at("converged").get<bool>();
    sample.iterations = js.at("iterations").get<int>();
    for (const json& jsnap : js.at("snapshots")) {
      Snapshot snap;
      snap.k = jsnap.at("iter").get<int>();
      snap.x = read_vector(dir + "/" + jsnap.at("x").get<std::string>());
      snap.r = read_vector(dir + "/" + jsnap.at("r").get<std::string>());
      sample.snapshots.push_back(std::move(snap));
    }
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

// ---------------------------------------------------------------------------

namespace {

double squared_norm(const DenseVector& v) { return dot(v, v); }

}  // namespace

double condition_loss(const CsrMatrix& A,
                      const std::vector<TrainSample>& samples,
                      const ApplyFn& apply) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const TrainSample& sample : samples) {
    for (const Snapshot& snap : sample.snapshots) {
      const DenseVector z = apply(snap.r);
      DenseVector d = spmv(A, z);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = snap.r[i] - d[i];
      sum += squared_norm(d);
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("condition loss needs snapshots");
  return sum / static_cast<double>(count);
}

double residual_loss(const CsrMatrix& A,
                     const std::vector<TrainSample>& samples,
                     const ApplyFn& apply) {
  if (samples.empty()) throw std::invalid_argument("residual loss needs samples");
  double sum = 0.0;
  for (const TrainSample& sample : samples) {
    const DenseVector z = apply(sample.rhs);
    DenseVector d = spmv(A, z);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = sample.rhs[i] - d[i];
    sum += squared_norm(d);
  }
  return sum / static_cast<double>(samples.size());
}

double data_loss(const std::vector<TrainSample>& samples, const ApplyFn& apply) {
  if (samples.empty()) throw std::invalid_argument("data loss needs samples");
  double sum = 0.0;
  for (const TrainSample& sample : samples) {
    DenseVector z = apply(sample.rhs);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= sample.solution[i];
    sum += squared_norm(z);
  }
  return sum / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (!(adam.lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (weights.condition < 0.0 || weights.residual < 0.0 || weights.data < 0.0)
    throw std::invalid_argument("loss weights must be nonnegative");
  if (weights.condition == 0.0 && weights.residual == 0.0 && weights.data == 0.0)
    throw std::invalid_argument("at least one loss weight must be positive");
}

namespace {

struct SampleLossParts {
  double total = 0.0;
  double data = 0.0;
  double residual = 0.0;
  double condition = 0.0;
};

/// Builds the per-sample weighted loss on the tape. Zero-weight components
/// are skipped, so ablated variants never even record those subgraphs.
ad::Tensor sample_loss(ad::Tape& tape, const NamgModel& model,
                       const std::vector<ad::Tensor>& leaves,
                       const NamgWorkspace& ws, const TrainSample& sample,
                       const LossWeights& w, SampleLossParts& parts) {
  const CsrMatrix& A = *ws.A;
  const int n = ws.n;
  ad::Tensor loss;
  auto add_term = [&](ad::Tensor t) {
    loss = loss.valid() ? tape.add(loss, t) : t;
  };

  if (w.condition > 0.0 && !sample.snapshots.empty()) {
    ad::Tensor sum;
    for (const Snapshot& snap : sample.snapshots) {
      const ad::Tensor z = apply_namg(tape, model, leaves, ws, snap.r);
      const ad::Tensor r_in = tape.input({n, 1}, snap.r);
      const ad::Tensor term =
          tape.sum_squares(tape.sub(r_in, tape.spmv_cols(A, z)));
      sum = sum.valid() ? tape.add(sum, term) : term;
    }
    const ad::Tensor cond =
        tape.scale(sum, 1.0 / static_cast<double>(sample.snapshots.size()));
    parts.condition = cond.value()[0];
    add_term(tape.scale(cond, w.condition));
  }

  if (w.residual > 0.0 || w.data > 0.0) {
    const ad::Tensor z_b = apply_namg(tape, model, leaves, ws, sample.rhs);
    if (w.residual > 0.0) {
      const ad::Tensor b_in = tape.input({n, 1}, sample.rhs);
      const ad::Tensor res =
          tape.sum_squares(tape.sub(b_in, tape.spmv_cols(A, z_b)));
      parts.residual = res.value()[0];
      add_term(tape.scale(res, w.residual));
    }
    if (w.data > 0.0) {
      const ad::Tensor x_in = tape.input({n, 1}, sample.solution);
      const ad::Tensor dat = tape.sum_squares(tape.sub(z_b, x_in));
      parts.data = dat.value()[0];
      add_term(tape.scale(dat, w.data));
    }
  }

  if (!loss.valid())
    throw std::invalid_argument("sample contributes no loss terms");
  parts.total = loss.value()[0];
  return loss;
}

}  // namespace

TrainResult train_model(NamgModel& model, const Dataset& ds,
                        const TrainConfig& cfg) {
  cfg.validate();
  if (ds.samples.empty()) throw std::invalid_argument("dataset has no samples");

  // One grid serves the whole dataset; the workspace must outlive every tape
  // recorded below because closures reference its mask.
  GridSpec grid = ds.config.grid;
  const NamgWorkspace ws = build_workspace(model, ds.matrix, grid);

  const std::size_t num_params = model.num_scalars();
  ad::AdamState adam(num_params);
  Rng shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(ds.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::FILE* log = nullptr;
  if (!cfg.log_csv.empty()) {
    log = std::fopen(cfg.log_csv.c_str(), "w");
    if (!log) throw std::runtime_error("cannot open training log: " + cfg.log_csv);
    std::fprintf(log, "epoch,loss_total,loss_data,loss_residual,loss_condition\n");
  }

  TrainResult result;
  result.best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = model.flat_params();

  try {
    std::vector<double> flat = model.flat_params();
    std::vector<double> grads(num_params);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      // Fisher-Yates reshuffle, seeded once for the whole run.
      for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = shuffle_rng.index(i);
        std::swap(order[i - 1], order[j]);
      }

      SampleLossParts epoch_parts;
      for (const std::size_t s : order) {
        ad::Tape tape;
        const std::vector<ad::Tensor> leaves = params_on_tape(tape, model, true);
        SampleLossParts parts;
        const ad::Tensor loss =
            sample_loss(tape, model, leaves, ws, ds.samples[s], cfg.weights, parts);
        if (!std::isfinite(parts.total))
          throw std::runtime_error("training diverged: non-finite loss");
        tape.backward(loss);

        std::size_t off = 0;
        for (const ad::Tensor& leaf : leaves) {
          const std::vector<double>& g = leaf.grad();
          const std::size_t len = leaf.shape().size();
          if (g.empty()) {
            std::fill(grads.begin() + off, grads.begin() + off + len, 0.0);
          } else {
            std::copy(g.begin(), g.end(), grads.begin() + off);
          }
          off += len;
        }
        adam.step(flat, grads, cfg.adam);
        model.set_flat_params(flat);

        epoch_parts.total += parts.total;
        epoch_parts.data += parts.data;
        epoch_parts.residual += parts.residual;
        epoch_parts.condition += parts.condition;
      }

      const double inv = 1.0 / static_cast<double>(ds.samples.size());
      EpochLog entry;
      entry.epoch = epoch;
      entry.total = epoch_parts.total * inv;
      entry.data = epoch_parts.data * inv;
      entry.residual = epoch_parts.residual * inv;
      entry.condition = epoch_parts.condition * inv;
      result.history.push_back(entry);
      if (log) {
        std::fprintf(log, "%d,%s,%s,%s,%s\n", entry.epoch,
                     format_double(entry.total).c_str(),
                     format_double(entry.data).c_str(),
                     format_double(entry.residual).c_str(),
                     format_double(entry.condition).c_str());
      }
      if (entry.total < result.best_loss) {
        result.best_loss = entry.total;
        result.best_epoch = epoch;
        best_params = flat;
      }
    }
  } catch (...) {
    if (log) std::fclose(log);
    throw;
  }
  if (log) std::fclose(log);

  model.set_flat_params(best_params);
  return result;
}

}  // namespace npsolve
