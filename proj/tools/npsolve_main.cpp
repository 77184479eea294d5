/**
 * Command-line front end: dataset generation, preconditioner training,
 * single solves, iteration/time benchmarks, and spectrum reports, all driven
 * by one --seed so identical invocations produce identical artifacts.
 */

#include <chrono>
#include <cstdio>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "npsolve/io.hpp"
#include "npsolve/krylov.hpp"
#include "npsolve/namg.hpp"
#include "npsolve/pde.hpp"
#include "npsolve/preconditioner.hpp"
#include "npsolve/spectral.hpp"
#include "npsolve/stationary.hpp"
#include "npsolve/training.hpp"
#include "npsolve/two_grid.hpp"

namespace {

using namespace npsolve;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Shared problem options.

struct ProblemOptions {
  std::string pde = "poisson1d";
  int n = 128;
  double diffusion_coeff = 1.0;
  double diffusion_contrast = 0.0;
  double dt = std::numeric_limits<double>::infinity();
  double lame_lambda = 1.0;
  double lame_mu = 1.0;
  double grf_length_scale = 0.1;
  double grf_variance = 1.0;
  std::uint64_t seed = 0;
};

void add_problem_options(CLI::App* sub, ProblemOptions& opt) {
  sub->add_option("--pde", opt.pde,
                  "Problem family: poisson1d, poisson2d, diffusion2d, elasticity2d")
      ->capture_default_str();
  sub->add_option("--n", opt.n, "Interior grid points per axis")
      ->capture_default_str();
  sub->add_option("--diffusion-coeff", opt.diffusion_coeff,
                  "Diffusion coefficient scale")
      ->capture_default_str();
  sub->add_option("--diffusion-contrast", opt.diffusion_contrast,
                  "Log-amplitude of the diffusion coefficient variation")
      ->capture_default_str();
  sub->add_option("--dt", opt.dt,
                  "Implicit time step for diffusion2d (inf drops the mass term)")
      ->capture_default_str();
  sub->add_option("--lame-lambda", opt.lame_lambda, "First Lame parameter")
      ->capture_default_str();
  sub->add_option("--lame-mu", opt.lame_mu, "Second Lame parameter (shear)")
      ->capture_default_str();
  sub->add_option("--length-scale", opt.grf_length_scale,
                  "Correlation length of the random right-hand sides")
      ->capture_default_str();
  sub->add_option("--variance", opt.grf_variance,
                  "Variance of the random right-hand sides")
      ->capture_default_str();
  sub->add_option("--seed", opt.seed, "Master random seed")
      ->capture_default_str();
}

PdeFamily make_family(const ProblemOptions& opt) {
  PdeFamily family;
  family.kind = pde_kind_from_string(opt.pde);
  family.diffusion_coeff = opt.diffusion_coeff;
  family.diffusion_contrast = opt.diffusion_contrast;
  family.dt = opt.dt;
  family.lame_lambda = opt.lame_lambda;
  family.lame_mu = opt.lame_mu;
  family.validate();
  return family;
}

GridSpec make_grid(const PdeFamily& family, int n) {
  GridSpec grid;
  grid.dims = family.kind == PdeKind::Poisson1D ? 1 : 2;
  grid.sizes.assign(grid.dims, n);
  grid.spacing = 1.0 / (n + 1);
  grid.validate();
  return grid;
}

// ---------------------------------------------------------------------------
// Preconditioner factory. Specs look like "jacobi", "sor:1.5",
// "twogrid:2,2" or "namg:path/to/checkpoint".

std::unique_ptr<Preconditioner> make_preconditioner(const std::string& spec,
                                                    const CsrMatrix& A,
                                                    const GridSpec& grid,
                                                    int dofs_per_node) {
  std::string name = spec;
  std::string arg;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    name = spec.substr(0, colon);
    arg = spec.substr(colon + 1);
  }
  auto int_arg = [&](int fallback) {
    return arg.empty() ? fallback : std::stoi(arg);
  };

  if (name == "identity" || name == "none")
    return std::make_unique<IdentityPreconditioner>();
  if (name == "jacobi")
    return std::make_unique<StationaryPreconditioner>(
        A, StationaryKind::Jacobi, int_arg(1), 1.0);
  if (name == "gs")
    return std::make_unique<StationaryPreconditioner>(
        A, StationaryKind::GaussSeidel, int_arg(1), 1.0);
  if (name == "sor")
    return std::make_unique<StationaryPreconditioner>(
        A, StationaryKind::Sor, 1, arg.empty() ? 1.5 : std::stod(arg));
  if (name == "twogrid") {
    int pre = 1;
    int post = 1;
    if (!arg.empty()) {
      const auto comma = arg.find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("twogrid takes pre,post sweep counts");
      pre = std::stoi(arg.substr(0, comma));
      post = std::stoi(arg.substr(comma + 1));
    }
    return std::make_unique<TwoGridPreconditioner>(A, grid, dofs_per_node, pre,
                                                   post);
  }
  if (name == "exactinv") return std::make_unique<DenseInversePreconditioner>(A);
  if (name == "namg") {
    if (arg.empty())
      throw std::invalid_argument("namg needs a checkpoint: namg:<path>");
    return std::make_unique<NamgPreconditioner>(load_checkpoint(arg), A, grid);
  }
  throw std::invalid_argument("unknown preconditioner: " + spec);
}

// ---------------------------------------------------------------------------
// Run manifests record the invocation and wall time; they are the only
// artifacts that are not byte-reproducible.

class RunTimer {
 public:
  RunTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_run_manifest(const std::string& path, const std::string& command,
                        std::uint64_t seed,
                        const std::vector<std::string>& outputs,
                        const RunTimer& timer) {
  json manifest;
  manifest["command"] = command;
  manifest["seed"] = seed;
  manifest["outputs"] = outputs;
  manifest["duration_seconds"] = timer.seconds();
  write_file_atomic(path, manifest.dump(2) + "\n");
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw std::invalid_argument("empty list: " + csv);
  return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (out.empty()) throw std::invalid_argument("empty list: " + csv);
  return out;
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataOptions {
  ProblemOptions problem;
  int samples = 8;
  double tol = 1e-10;
  int max_iters = 100;
  int stride = 1;
  std::string out;
};

int run_gen_data(const GenDataOptions& opt) {
  RunTimer timer;
  DatasetConfig cfg;
  cfg.family = make_family(opt.problem);
  cfg.grid = make_grid(cfg.family, opt.problem.n);
  cfg.num_samples = opt.samples;
  cfg.grf_length_scale = opt.problem.grf_length_scale;
  cfg.grf_variance = opt.problem.grf_variance;
  cfg.seed = opt.problem.seed;
  cfg.tol = opt.tol;
  cfg.max_iters = opt.max_iters;
  cfg.record_stride = opt.stride;

  const Dataset ds = generate_dataset(cfg);
  write_dataset(ds, opt.out);
  write_run_manifest(opt.out + "/run_manifest.json", "gen-data", cfg.seed,
                     {opt.out + "/manifest.json"}, timer);

  std::size_t snapshots = 0;
  for (const auto& s : ds.samples) snapshots += s.snapshots.size();
  std::printf("wrote %d samples (%zu snapshots) to %s\n", cfg.num_samples,
              snapshots, opt.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string data;
  std::string out;
  std::string log_csv;
  int epochs = 150;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double w_condition = 1.0;
  double w_residual = 1.0;
  double w_data = 1.0;
  int feature_width = 32;
  int num_coarse = 128;
  int heads = 4;
  int pre_relax = 1;
  int post_relax = 1;
  double temperature = 0.0;
  double damping = 2.0 / 3.0;
  bool no_matrix_features = false;
  bool bypass = false;
};

int run_train(const TrainOptions& opt) {
  RunTimer timer;
  const Dataset ds = read_dataset(opt.data);

  NamgConfig mcfg;
  mcfg.feature_width = opt.feature_width;
  mcfg.num_coarse = opt.num_coarse;
  mcfg.num_heads = opt.heads;
  mcfg.pre_relax = opt.pre_relax;
  mcfg.post_relax = opt.post_relax;
  mcfg.temperature = opt.temperature;
  mcfg.init_damping = opt.damping;
  mcfg.use_matrix_features = !opt.no_matrix_features;
  mcfg.bypass_network = opt.bypass;
  NamgModel model(mcfg, ds.config.grid.dims, opt.seed);

  TrainConfig tcfg;
  tcfg.epochs = opt.epochs;
  tcfg.adam.lr = opt.lr;
  tcfg.weights.condition = opt.w_condition;
  tcfg.weights.residual = opt.w_residual;
  tcfg.weights.data = opt.w_data;
  tcfg.seed = opt.seed;
  tcfg.log_csv = opt.log_csv;

  const TrainResult result = train_model(model, ds, tcfg);
  save_checkpoint(model, opt.out);

  std::vector<std::string> outputs{opt.out};
  if (!opt.log_csv.empty()) outputs.push_back(opt.log_csv);
  write_run_manifest(opt.out + ".run.json", "train", opt.seed, outputs, timer);

  std::printf("best_epoch,best_loss\n%d,%s\n", result.best_epoch,
              format_double(result.best_loss).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOptions {
  ProblemOptions problem;
  std::string solver = "gmres";
  std::string precond = "identity";
  double tol = 1e-10;
  int max_iters = 0;  // 0: unknown count + 16
  int restart = 0;
  std::string trace_csv;
  std::string solution_path;
};

SolveTrace run_one_solve(const CsrMatrix& A, const DenseVector& b,
                         const Preconditioner& M, const std::string& solver,
                         const SolveConfig& cfg) {
  if (solver == "cg") return cg_solve(A, b, M, cfg);
  if (solver == "gmres") return gmres_solve(A, b, M, cfg);
  throw std::invalid_argument("unknown solver: " + solver);
}

int run_solve(const SolveOptions& opt) {
  RunTimer timer;
  const PdeFamily family = make_family(opt.problem);
  const GridSpec grid = make_grid(family, opt.problem.n);
  const CsrMatrix A = assemble(family, grid);
  const DenseVector b =
      sample_rhs(family, grid, opt.problem.grf_length_scale,
                 opt.problem.grf_variance, opt.problem.seed, 0);
  const auto M =
      make_preconditioner(opt.precond, A, grid, family.dofs_per_node());

  SolveConfig cfg;
  cfg.tol = opt.tol;
  cfg.max_iters = opt.max_iters > 0 ? opt.max_iters : A.n_rows() + 16;
  cfg.restart = opt.restart;
  const SolveTrace trace = run_one_solve(A, b, *M, opt.solver, cfg);

  if (!opt.trace_csv.empty()) {
    std::string csv = "iter,residual_norm\n";
    for (std::size_t k = 0; k < trace.residual_norms.size(); ++k)
      csv += std::to_string(k) + "," + format_double(trace.residual_norms[k]) +
             "\n";
    write_file_atomic(opt.trace_csv, csv);
  }
  if (!opt.solution_path.empty()) write_vector(opt.solution_path, trace.x);
  if (!opt.trace_csv.empty() || !opt.solution_path.empty()) {
    std::vector<std::string> outputs;
    if (!opt.trace_csv.empty()) outputs.push_back(opt.trace_csv);
    if (!opt.solution_path.empty()) outputs.push_back(opt.solution_path);
    const std::string base =
        !opt.trace_csv.empty() ? opt.trace_csv : opt.solution_path;
    write_run_manifest(base + ".run.json", "solve", opt.problem.seed, outputs,
                       timer);
  }

  const double rel =
      trace.residual_norms.back() / std::max(trace.residual_norms.front(),
                                             std::numeric_limits<double>::min());
  std::printf("converged,iterations,final_residual\n%s,%d,%s\n",
              trace.converged ? "true" : "false", trace.iterations,
              format_double(rel).c_str());
  return trace.converged ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  ProblemOptions problem;
  std::string methods = "jacobi,gs,twogrid";
  std::string resolutions = "128,256,512";
  int max_iters = 0;
  int restart = 0;
  std::string out;
};

int run_bench(const BenchOptions& opt) {
  RunTimer timer;
  const PdeFamily family = make_family(opt.problem);
  const std::vector<std::string> methods = parse_string_list(opt.methods);
  const std::vector<int> resolutions = parse_int_list(opt.resolutions);
  const double targets[] = {1e-4, 1e-6, 1e-10};

  std::string csv = "method,resolution,tol,iterations,seconds\n";
  for (const std::string& method : methods) {
    for (const int n : resolutions) {
      const GridSpec grid = make_grid(family, n);
      const CsrMatrix A = assemble(family, grid);
      const DenseVector b =
          sample_rhs(family, grid, opt.problem.grf_length_scale,
                     opt.problem.grf_variance, opt.problem.seed, 0);
      const auto M =
          make_preconditioner(method, A, grid, family.dofs_per_node());

      SolveConfig cfg;
      cfg.tol = 1e-10;
      cfg.max_iters = opt.max_iters > 0 ? opt.max_iters : A.n_rows() + 16;
      cfg.restart = opt.restart;
      RunTimer solve_timer;
      const SolveTrace trace = gmres_solve(A, b, *M, cfg);
      const double seconds = solve_timer.seconds();

      // All three tolerance crossings come from the one tol=1e-10 trace.
      const double b_norm = trace.residual_norms.front();
      for (const double target : targets) {
        int crossing = -1;
        for (std::size_t k = 0; k < trace.residual_norms.size(); ++k) {
          if (trace.residual_norms[k] <= target * b_norm) {
            crossing = static_cast<int>(k);
            break;
          }
        }
        char line[160];
        std::snprintf(line, sizeof(line), "%s,%d,%.0e,%d,%.6f\n",
                      method.c_str(), n, target, crossing, seconds);
        csv += line;
      }
    }
  }

  if (opt.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_file_atomic(opt.out, csv);
    write_run_manifest(opt.out + ".run.json", "bench", opt.problem.seed,
                       {opt.out}, timer);
    std::printf("wrote %s\n", opt.out.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumOptions {
  ProblemOptions problem;
  std::string precond = "identity";
  std::string resolutions = "63,127,255";
  std::string method = "auto";
  std::string out;
};

int run_spectrum(const SpectrumOptions& opt) {
  RunTimer timer;
  const PdeFamily family = make_family(opt.problem);
  const std::vector<int> resolutions = parse_int_list(opt.resolutions);

  std::string csv = "size,lambda_min,lambda_max,kappa,rho\n";
  for (const int n : resolutions) {
    const GridSpec grid = make_grid(family, n);
    const CsrMatrix A = assemble(family, grid);
    const auto M =
        make_preconditioner(opt.precond, A, grid, family.dofs_per_node());
    const bool linear = M->is_linear();
    const int size = A.n_rows();

    SpectrumMethod method;
    if (opt.method == "dense") {
      method = SpectrumMethod::DenseOracle;
    } else if (opt.method == "lanczos") {
      method = SpectrumMethod::Lanczos;
    } else if (opt.method == "power") {
      method = SpectrumMethod::PowerIteration;
    } else if (opt.method == "auto") {
      method = size <= 1024 ? SpectrumMethod::DenseOracle
               : M->claims_spd() ? SpectrumMethod::Lanczos
                                 : SpectrumMethod::PowerIteration;
    } else {
      throw std::invalid_argument("unknown spectrum method: " + opt.method);
    }

    const SpectrumReport rep = estimate_spectrum(A, *M, method, linear);
    // The contraction factor needs the dense propagator; skip it above the
    // dense guard and report nan.
    double rho = std::numeric_limits<double>::quiet_NaN();
    if (size <= 1024) rho = contraction_factor(A, *M).rho;

    csv += std::to_string(size) + "," + format_double(rep.lambda_min) + "," +
           format_double(rep.lambda_max) + "," + format_double(rep.kappa) +
           "," + format_double(rho) + "\n";
  }

  if (opt.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_file_atomic(opt.out, csv);
    write_run_manifest(opt.out + ".run.json", "spectrum", opt.problem.seed,
                       {opt.out}, timer);
    std::printf("wrote %s\n", opt.out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Sparse solver toolkit: structured PDE systems, Krylov solvers, "
      "classical and learned preconditioners"};
  app.require_subcommand(1);

  GenDataOptions gen_opt;
  CLI::App* gen = app.add_subcommand(
      "gen-data", "Record solver trajectories as a training dataset");
  add_problem_options(gen, gen_opt.problem);
  gen->add_option("--samples", gen_opt.samples, "Right-hand sides to record")
      ->capture_default_str();
  gen->add_option("--tol", gen_opt.tol, "Recording solver tolerance")
      ->capture_default_str();
  gen->add_option("--max-iters", gen_opt.max_iters, "Recording iteration cap")
      ->capture_default_str();
  gen->add_option("--stride", gen_opt.stride, "Snapshot stride")
      ->capture_default_str();
  gen->add_option("--out", gen_opt.out, "Output dataset directory")->required();

  TrainOptions train_opt;
  CLI::App* train = app.add_subcommand(
      "train", "Train the learned preconditioner on a recorded dataset");
  train->add_option("--data", train_opt.data, "Dataset directory")->required();
  train->add_option("--out", train_opt.out, "Checkpoint output path")
      ->required();
  train->add_option("--log", train_opt.log_csv, "Per-epoch loss CSV");
  train->add_option("--epochs", train_opt.epochs, "Training epochs")
      ->capture_default_str();
  train->add_option("--lr", train_opt.lr, "Adam learning rate")
      ->capture_default_str();
  train->add_option("--seed", train_opt.seed, "Init and shuffle seed")
      ->capture_default_str();
  train->add_option("--w-condition", train_opt.w_condition,
                    "Weight of the preconditioned-residual loss")
      ->capture_default_str();
  train->add_option("--w-residual", train_opt.w_residual,
                    "Weight of the right-hand-side residual loss")
      ->capture_default_str();
  train->add_option("--w-data", train_opt.w_data,
                    "Weight of the solution reconstruction loss")
      ->capture_default_str();
  train->add_option("--feature-width", train_opt.feature_width, "Token width")
      ->capture_default_str();
  train->add_option("--num-coarse", train_opt.num_coarse, "Coarse tokens")
      ->capture_default_str();
  train->add_option("--heads", train_opt.heads, "Attention heads")
      ->capture_default_str();
  train->add_option("--pre", train_opt.pre_relax, "Pre-relaxation sweeps")
      ->capture_default_str();
  train->add_option("--post", train_opt.post_relax, "Post-relaxation sweeps")
      ->capture_default_str();
  train->add_option("--tau", train_opt.temperature,
                    "Score temperature (0: sqrt of token width)")
      ->capture_default_str();
  train->add_option("--damping", train_opt.damping,
                    "Initial relaxation damping")
      ->capture_default_str();
  train->add_flag("--no-matrix-features", train_opt.no_matrix_features,
                  "Drop the matrix-derived feature channels");
  train->add_flag("--bypass", train_opt.bypass,
                  "Bypass the network (relaxation-only ablation)");

  SolveOptions solve_opt;
  CLI::App* solve = app.add_subcommand("solve", "Solve one seeded system");
  add_problem_options(solve, solve_opt.problem);
  solve->add_option("--solver", solve_opt.solver, "cg or gmres")
      ->capture_default_str();
  solve
      ->add_option("--precond", solve_opt.precond,
                   "identity, jacobi[:sweeps], gs[:sweeps], sor[:omega], "
                   "twogrid[:pre,post], exactinv, namg:<checkpoint>")
      ->capture_default_str();
  solve->add_option("--tol", solve_opt.tol, "Relative residual tolerance")
      ->capture_default_str();
  solve->add_option("--max-iters", solve_opt.max_iters,
                    "Iteration cap (0: unknowns + 16)")
      ->capture_default_str();
  solve->add_option("--restart", solve_opt.restart,
                    "GMRES restart length (0: no restart)")
      ->capture_default_str();
  solve->add_option("--trace", solve_opt.trace_csv,
                    "Write the residual history CSV here");
  solve->add_option("--solution", solve_opt.solution_path,
                    "Write the final iterate here");

  BenchOptions bench_opt;
  CLI::App* bench = app.add_subcommand(
      "bench", "Iterations-to-tolerance across methods and resolutions");
  add_problem_options(bench, bench_opt.problem);
  bench->add_option("--methods", bench_opt.methods, "Comma-separated methods")
      ->capture_default_str();
  bench
      ->add_option("--resolutions", bench_opt.resolutions,
                   "Comma-separated grid sizes")
      ->capture_default_str();
  bench->add_option("--max-iters", bench_opt.max_iters,
                    "Iteration cap (0: unknowns + 16)")
      ->capture_default_str();
  bench->add_option("--restart", bench_opt.restart,
                    "GMRES restart length (0: no restart)")
      ->capture_default_str();
  bench->add_option("--out", bench_opt.out, "Output CSV (default stdout)");

  SpectrumOptions spectrum_opt;
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "Extreme eigenvalues and contraction factors");
  add_problem_options(spectrum, spectrum_opt.problem);
  spectrum
      ->add_option("--precond", spectrum_opt.precond,
                   "Preconditioner spec (see solve --precond)")
      ->capture_default_str();
  spectrum
      ->add_option("--resolutions", spectrum_opt.resolutions,
                   "Comma-separated grid sizes")
      ->capture_default_str();
  spectrum
      ->add_option("--method", spectrum_opt.method,
                   "auto, dense, lanczos or power")
      ->capture_default_str();
  spectrum->add_option("--out", spectrum_opt.out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return run_gen_data(gen_opt);
    if (train->parsed()) return run_train(train_opt);
    if (solve->parsed()) return run_solve(solve_opt);
    if (bench->parsed()) return run_bench(bench_opt);
    if (spectrum->parsed()) return run_spectrum(spectrum_opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
