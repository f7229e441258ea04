#include "hkcg/extension.hpp"

#include <cmath>
#include <string>

#include "hkcg/error.hpp"

namespace hkcg {

LatticeSpec::LatticeSpec(Eigen::MatrixXd generators) : generators_(std::move(generators)) {
  require(generators_.rows() >= 1 && generators_.rows() == generators_.cols(),
          "lattice generator matrix must be square and non-empty");
  require(generators_.allFinite(), "lattice generators must be finite");
  lu_.compute(generators_);
  require(lu_.isInvertible() && std::abs(lu_.determinant()) > 0.0,
          "lattice generator matrix is singular");
}

LatticeSpec LatticeSpec::identity(int dimension) {
  return LatticeSpec(Eigen::MatrixXd::Identity(dimension, dimension));
}

LatticeSpec LatticeSpec::from_row_major(int dimension, std::span<const double> values) {
  require(dimension >= 1 && values.size() == static_cast<std::size_t>(dimension) * dimension,
          "lattice needs " + std::to_string(dimension * dimension) + " row-major entries (got " +
              std::to_string(values.size()) + ")");
  Eigen::MatrixXd m(dimension, dimension);
  for (int r = 0; r < dimension; ++r)
    for (int c = 0; c < dimension; ++c) m(r, c) = values[static_cast<std::size_t>(r) * dimension + c];
  return LatticeSpec(std::move(m));
}

Eigen::VectorXd LatticeSpec::lattice_coordinates(std::span<const double> v) const {
  require(static_cast<int>(v.size()) == dimension(), "vector length does not match lattice dimension");
  return lu_.solve(Eigen::Map<const Eigen::VectorXd>(v.data(), dimension()));
}

Eigen::VectorXd LatticeSpec::ambient(std::span<const double> lattice_coords) const {
  require(static_cast<int>(lattice_coords.size()) == dimension(),
          "coordinate length does not match lattice dimension");
  return generators_ * Eigen::Map<const Eigen::VectorXd>(lattice_coords.data(), dimension());
}

namespace {

void require_congruent(const AlgebraField& a, const AlgebraField& b, const char* what) {
  if (!a.congruent(b)) throw PreconditionError(std::string(what) + ": field shapes differ");
}

double fractional(double x) {
  double f = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.
  if (f >= 1.0) f = 0.0;
  return f;
}

}  // namespace

AlgebraField pointwise_bracket(const LieBasis& lie, const AlgebraField& eta, const AlgebraField& eta1) {
  require_congruent(eta, eta1, "bracket");
  require(eta.width() == lie.dim(), "bracket: field width is not dim Lie G");
  AlgebraField out(eta.grid(), eta.width());
  for (int p = 0; p < eta.points(); ++p) lie.bracket_into(eta.at(p), eta1.at(p), out.at(p));
  return out;
}

AlgebraField pointwise_killing(const LieBasis& lie, const AlgebraField& eta, const AlgebraField& eta1) {
  require_congruent(eta, eta1, "Killing pairing");
  require(eta.width() == lie.dim(), "Killing pairing: field width is not dim Lie G");
  AlgebraField out(eta.grid(), 1);
  for (int p = 0; p < eta.points(); ++p) out.at(p)[0] = lie.killing(eta.at(p), eta1.at(p));
  return out;
}

double leibniz_check(const LieBasis& lie, const AlgebraField& eta, const AlgebraField& eta1) {
  const AlgebraField pairing = pointwise_killing(lie, eta, eta1);
  const OneFormField d_pairing = exterior_derivative(pairing);
  const OneFormField d_eta = exterior_derivative(eta);
  const OneFormField d_eta1 = exterior_derivative(eta1);
  double residual = 0.0;
  for (int axis = 0; axis < eta.grid().dim(); ++axis) {
    for (int p = 0; p < eta.points(); ++p) {
      const double lhs = d_pairing.components[axis].at(p)[0];
      const double rhs = lie.killing(d_eta.components[axis].at(p), eta1.at(p)) +
                         lie.killing(eta.at(p), d_eta1.components[axis].at(p));
      residual = std::max(residual, std::abs(lhs - rhs));
    }
  }
  return residual;
}

CohomologyVector harmonic_projection(const OneFormField& omega) {
  require(!omega.components.empty(), "harmonic projection of an empty 1-form");
  CohomologyVector out;
  out.axes = static_cast<int>(omega.components.size());
  out.width = omega.width();
  out.coords.assign(static_cast<std::size_t>(out.axes) * out.width, 0.0);
  for (int axis = 0; axis < out.axes; ++axis) {
    const AlgebraField& comp = omega.components[axis];
    require(comp.grid() == omega.grid() && comp.width() == out.width,
            "harmonic projection: components are not congruent");
    for (int a = 0; a < out.width; ++a) {
      double sum = 0.0;
      for (int p = 0; p < comp.points(); ++p) sum += comp.at(p)[a];
      out.coords[static_cast<std::size_t>(axis) * out.width + a] = sum / comp.points();
    }
  }
  return out;
}

CohomologyVector cocycle(const LieBasis& lie, const AlgebraField& eta, const AlgebraField& eta1) {
  require_congruent(eta, eta1, "cocycle");
  const OneFormField d_eta1 = exterior_derivative(eta1);
  OneFormField omega;
  for (const AlgebraField& comp : d_eta1.components) omega.components.push_back(pointwise_killing(lie, eta, comp));
  return harmonic_projection(omega);
}

CentralTorusElement reduce_mod_lattice(std::span<const double> v, const LatticeSpec& lattice) {
  for (double x : v) require(std::isfinite(x), "reduce_mod_lattice: non-finite coordinate");
  const Eigen::VectorXd c = lattice.lattice_coordinates(v);
  CentralTorusElement out;
  out.coords.resize(static_cast<std::size_t>(c.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) out.coords[static_cast<std::size_t>(i)] = fractional(c[i]);
  return out;
}

CentralTorusElement haar_sample(const LatticeSpec& lattice, RngStream& stream) {
  CentralTorusElement out;
  out.coords.resize(static_cast<std::size_t>(lattice.dimension()));
  for (double& c : out.coords) c = stream.uniform();
  return out;
}

ExtendedElement sample_extension(const SdeConfig& cfg, const LatticeSpec& lattice, const RngStream& stream) {
  const int expected = central_dimension(cfg.spec.grid().dim(), cfg.spec.lie().n());
  require(lattice.dimension() == expected, "lattice dimension " + std::to_string(lattice.dimension()) +
                                               " does not match H^1 dimension " + std::to_string(expected));
  RngStream central_stream = stream.lane(1);
  return ExtendedElement{sample_field(cfg, stream.lane(0)), haar_sample(lattice, central_stream)};
}

ExtendedElement sample_extension(const SdeConfig& cfg, const LatticeSpec& lattice) {
  return sample_extension(cfg, lattice, substream(cfg.seed, 0));
}

std::pair<AlgebraField, CohomologyVector> extended_bracket(const LieBasis& lie,
                                                           const ExtendedAlgebraElement& x,
                                                           const ExtendedAlgebraElement& y) {
  return {pointwise_bracket(lie, x.field, y.field), cocycle(lie, x.field, y.field)};
}

std::vector<double> draw_central_increment(int dimension, double dt, double sigma, RngStream& stream) {
  require(dt > 0.0, "central increment: dt must be > 0");
  require(sigma >= 0.0, "central increment: sigma must be >= 0");
  const double scale = sigma * std::sqrt(dt);
  std::vector<double> out(static_cast<std::size_t>(dimension));
  for (double& x : out) x = scale * stream.normal();
  return out;
}

ExtendedElement extended_sde_step(const ExtendedElement& state, const AlgebraField& incr,
                                  std::span<const double> central_incr, double dt,
                                  const LatticeSpec& lattice, const LieBasis& lie) {
  require(static_cast<int>(state.central.coords.size()) == lattice.dimension() &&
              static_cast<int>(central_incr.size()) == lattice.dimension(),
          "extended step: central dimension mismatch");
  ExtendedElement next{step(state.field, incr, dt, lie), {}};
  const Eigen::VectorXd shift = lattice.lattice_coordinates(central_incr);
  next.central.coords.resize(state.central.coords.size());
  for (std::size_t i = 0; i < next.central.coords.size(); ++i)
    next.central.coords[i] = fractional(state.central.coords[i] + shift[static_cast<Eigen::Index>(i)]);
  return next;
}

AlgebraField random_band_limited_field(const TorusGrid& grid, int width, int max_mode, RngStream& stream) {
  const SpectralBasis basis(grid, max_mode);
  AlgebraField out(grid, width);
  const Eigen::MatrixXd& values = basis.values();
  for (int m = 0; m < basis.size(); ++m) {
    for (int a = 0; a < width; ++a) {
      const double xi = stream.normal();
      for (int p = 0; p < grid.size(); ++p) out.at(p)[a] += xi * values(p, m);
    }
  }
  return out;
}

}  // namespace hkcg
