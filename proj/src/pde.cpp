#include "npsolve/pde.hpp"

#include <cmath>
#include <stdexcept>

namespace npsolve {

void GridSpec::validate() const {
  if (dims != 1 && dims != 2)
    throw std::invalid_argument("GridSpec: dims must be 1 or 2");
  if (static_cast<int>(sizes.size()) != dims)
    throw std::invalid_argument("GridSpec: sizes must have one entry per dim");
  for (int s : sizes)
    if (s < 2) throw std::invalid_argument("GridSpec: sizes must be >= 2");
  if (!(spacing > 0.0))
    throw std::invalid_argument("GridSpec: spacing must be positive");
}

void PdeFamily::validate() const {
  if (kind == PdeKind::Diffusion2D) {
    if (!(diffusion_coeff > 0.0))
      throw std::invalid_argument("PdeFamily: diffusion coefficient must be positive");
    if (!(dt > 0.0))
      throw std::invalid_argument("PdeFamily: dt must be positive");
  }
  if (kind == PdeKind::Elasticity2D) {
    if (!(lame_mu > 0.0))
      throw std::invalid_argument("PdeFamily: mu must be positive");
    if (lame_lambda < 0.0)
      throw std::invalid_argument("PdeFamily: lambda must be nonnegative");
  }
}

PdeKind pde_kind_from_string(const std::string& name) {
  if (name == "poisson1d") return PdeKind::Poisson1D;
  if (name == "poisson2d") return PdeKind::Poisson2D;
  if (name == "diffusion2d") return PdeKind::Diffusion2D;
  if (name == "elasticity2d") return PdeKind::Elasticity2D;
  throw std::invalid_argument("unknown PDE family: " + name);
}

std::string to_string(PdeKind kind) {
  switch (kind) {
    case PdeKind::Poisson1D: return "poisson1d";
    case PdeKind::Poisson2D: return "poisson2d";
    case PdeKind::Diffusion2D: return "diffusion2d";
    case PdeKind::Elasticity2D: return "elasticity2d";
  }
  return "?";
}

namespace {

CsrMatrix assemble_poisson1d(const GridSpec& grid) {
  int n = grid.sizes[0];
  double ih2 = 1.0 / (grid.spacing * grid.spacing);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0 * ih2});
    if (i > 0) t.push_back({i, i - 1, -ih2});
    if (i < n - 1) t.push_back({i, i + 1, -ih2});
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

CsrMatrix assemble_poisson2d(const GridSpec& grid) {
  int nx = grid.sizes[0], ny = grid.sizes[1];
  double ih2 = 1.0 / (grid.spacing * grid.spacing);
  auto idx = [nx](int x, int y) { return y * nx + x; };
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(5 * nx * ny));
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      int i = idx(x, y);
      t.push_back({i, i, 4.0 * ih2});
      if (x > 0) t.push_back({i, idx(x - 1, y), -ih2});
      if (x < nx - 1) t.push_back({i, idx(x + 1, y), -ih2});
      if (y > 0) t.push_back({i, idx(x, y - 1), -ih2});
      if (y < ny - 1) t.push_back({i, idx(x, y + 1), -ih2});
    }
  return CsrMatrix::from_triplets(nx * ny, nx * ny, std::move(t));
}

CsrMatrix assemble_diffusion2d(const PdeFamily& fam, const GridSpec& grid) {
  int nx = grid.sizes[0], ny = grid.sizes[1];
  double h = grid.spacing;
  double ih2 = 1.0 / (h * h);
  auto idx = [nx](int x, int y) { return y * nx + x; };
  // Coefficient field at grid nodes; interior node i is at (i+1)*h, boundary
  // nodes included for faces that touch the boundary.
  auto coeff = [&](int x, int y) {
    double px = (x + 1) * h, py = (y + 1) * h;
    double pi = 3.14159265358979323846;
    return fam.diffusion_coeff *
           std::exp(fam.diffusion_contrast * std::sin(2.0 * pi * px) *
                    std::sin(2.0 * pi * py));
  };
  auto harmonic = [](double a, double b) { return 2.0 * a * b / (a + b); };
  double mass = std::isinf(fam.dt) ? 0.0 : 1.0 / fam.dt;

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(5 * nx * ny));
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      int i = idx(x, y);
      double d = coeff(x, y);
      double west = harmonic(d, coeff(x - 1, y));
      double east = harmonic(d, coeff(x + 1, y));
      double south = harmonic(d, coeff(x, y - 1));
      double north = harmonic(d, coeff(x, y + 1));
      t.push_back({i, i, mass + (west + east + south + north) * ih2});
      if (x > 0) t.push_back({i, idx(x - 1, y), -west * ih2});
      if (x < nx - 1) t.push_back({i, idx(x + 1, y), -east * ih2});
      if (y > 0) t.push_back({i, idx(x, y - 1), -south * ih2});
      if (y < ny - 1) t.push_back({i, idx(x, y + 1), -north * ih2});
    }
  return CsrMatrix::from_triplets(nx * ny, nx * ny, std::move(t));
}

// Navier-Cauchy, plane strain, central differences. Unknowns are the two
// displacement components per node. The mixed-derivative coupling uses the
// symmetric 4-point cross stencil, so the assembled matrix is symmetric.
CsrMatrix assemble_elasticity2d(const PdeFamily& fam, const GridSpec& grid) {
  int nx = grid.sizes[0], ny = grid.sizes[1];
  double ih2 = 1.0 / (grid.spacing * grid.spacing);
  double mu = fam.lame_mu, lam = fam.lame_lambda;
  double a = (2.0 * mu + lam) * ih2;  // second derivative along own axis
  double b = mu * ih2;                // second derivative across
  double c = (lam + mu) * ih2 / 4.0;  // mixed derivative cross weight
  auto node = [nx](int x, int y) { return y * nx + x; };
  auto dof = [&](int x, int y, int comp) { return 2 * node(x, y) + comp; };

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(18 * nx * ny));
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      for (int comp = 0; comp < 2; ++comp) {
        int i = dof(x, y, comp);
        double ax = comp == 0 ? a : b;  // own-axis weight along x
        double ay = comp == 0 ? b : a;
        t.push_back({i, i, 2.0 * (ax + ay)});
        if (x > 0) t.push_back({i, dof(x - 1, y, comp), -ax});
        if (x < nx - 1) t.push_back({i, dof(x + 1, y, comp), -ax});
        if (y > 0) t.push_back({i, dof(x, y - 1, comp), -ay});
        if (y < ny - 1) t.push_back({i, dof(x, y + 1, comp), -ay});
        // shear coupling to the other component at the four diagonal nodes
        int other = 1 - comp;
        if (x > 0 && y > 0) t.push_back({i, dof(x - 1, y - 1, other), -c});
        if (x < nx - 1 && y < ny - 1)
          t.push_back({i, dof(x + 1, y + 1, other), -c});
        if (x > 0 && y < ny - 1) t.push_back({i, dof(x - 1, y + 1, other), c});
        if (x < nx - 1 && y > 0) t.push_back({i, dof(x + 1, y - 1, other), c});
      }
  int n = 2 * nx * ny;
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace

CsrMatrix assemble(const PdeFamily& family, const GridSpec& grid) {
  family.validate();
  grid.validate();
  switch (family.kind) {
    case PdeKind::Poisson1D:
      if (grid.dims != 1)
        throw std::invalid_argument("poisson1d needs a 1D grid");
      return assemble_poisson1d(grid);
    case PdeKind::Poisson2D:
      if (grid.dims != 2)
        throw std::invalid_argument("poisson2d needs a 2D grid");
      return assemble_poisson2d(grid);
    case PdeKind::Diffusion2D:
      if (grid.dims != 2)
        throw std::invalid_argument("diffusion2d needs a 2D grid");
      return assemble_diffusion2d(family, grid);
    case PdeKind::Elasticity2D:
      if (grid.dims != 2)
        throw std::invalid_argument("elasticity2d needs a 2D grid");
      return assemble_elasticity2d(family, grid);
  }
  throw std::logic_error("unreachable");
}

}  // namespace npsolve
