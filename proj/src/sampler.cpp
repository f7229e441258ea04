#include "hkcg/sampler.hpp"

#include <cmath>
#include <exception>
#include <sstream>
#include <string>

#include "hkcg/error.hpp"

namespace hkcg {

FieldState::FieldState(TorusGrid grid, int n, double t)
    : grid_(grid), n_(n), t_(t), data_(static_cast<std::size_t>(grid.size()) * n * n) {
  require(n >= 2, "field group rank must be >= 2");
}

GroupElement FieldState::element(int point) const {
  return GroupElement{Eigen::Map<const RowMajorCMatrix>(at(point).data(), n_, n_)};
}

void SdeConfig::validate() const {
  require(n_steps >= 1, "n_steps must be >= 1 (got " + std::to_string(n_steps) + ")");
  require(t_end > 0.0 && std::isfinite(t_end), "t_end must be a finite positive number");
}

FieldState initial_state(const TorusGrid& grid, int n) {
  FieldState state(grid, n, 0.0);
  for (int p = 0; p < state.points(); ++p) {
    auto g = state.at(p);
    for (int r = 0; r < n; ++r) g[static_cast<std::size_t>(r) * n + r] = 1.0;
  }
  return state;
}

FieldState initial_state(const TorusGrid& grid, const GroupElement& a) {
  const int n = static_cast<int>(a.mat.rows());
  require(a.mat.cols() == n, "initial element must be square");
  FieldState state(grid, n, 0.0);
  for (int p = 0; p < state.points(); ++p)
    Eigen::Map<RowMajorCMatrix>(state.at(p).data(), n, n) = a.mat;
  return state;
}

namespace {

// g <- g * exp(x) for one point; `scratch` holds n*n entries.
inline void right_multiply_exp(const LieBasis& lie, std::span<const double> x, std::span<Complex> g,
                               std::span<Complex> scratch) {
  const int n = lie.n();
  lie.exp_into(x, scratch);
  if (n == 2) {
    const Complex g00 = g[0], g01 = g[1], g10 = g[2], g11 = g[3];
    const Complex e00 = scratch[0], e01 = scratch[1], e10 = scratch[2], e11 = scratch[3];
    g[0] = g00 * e00 + g01 * e10;
    g[1] = g00 * e01 + g01 * e11;
    g[2] = g10 * e00 + g11 * e10;
    g[3] = g10 * e01 + g11 * e11;
    return;
  }
  Eigen::Map<RowMajorCMatrix> gm(g.data(), n, n);
  const Eigen::Map<const RowMajorCMatrix> em(scratch.data(), n, n);
  const RowMajorCMatrix prod = gm * em;
  gm = prod;
}

void check_finite(const FieldState& state, int step_index) {
  for (int p = 0; p < state.points(); ++p) {
    for (const Complex& z : state.at(p)) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        std::ostringstream msg;
        msg << "non-finite group entry at grid point " << p << " after step " << step_index
            << " (t = " << state.time() << ")";
        throw NonFiniteError(msg.str());
      }
    }
  }
}

}  // namespace

void step_inplace(FieldState& state, const AlgebraField& incr, double dt, const LieBasis& lie,
                  Exec exec) {
  require(incr.grid() == state.grid(), "step: increment and state live on different grids");
  require(incr.width() == lie.dim() && state.n() == lie.n(), "step: Lie dimension mismatch");
  const int n2 = lie.n() * lie.n();
  const int points = state.points();
  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<Complex> scratch(static_cast<std::size_t>(n2));
#pragma omp for schedule(static)
      for (int p = 0; p < points; ++p) right_multiply_exp(lie, incr.at(p), state.at(p), scratch);
    }
  } else {
    std::vector<Complex> scratch(static_cast<std::size_t>(n2));
    for (int p = 0; p < points; ++p) right_multiply_exp(lie, incr.at(p), state.at(p), scratch);
  }
  state.set_time(state.time() + dt);
}

FieldState step(const FieldState& state, const AlgebraField& incr, double dt, const LieBasis& lie,
                Exec exec) {
  FieldState next = state;
  step_inplace(next, incr, dt, lie, exec);
  return next;
}

FieldState sample_field(const SdeConfig& cfg, const FieldState& start, RngStream stream, Exec exec) {
  cfg.validate();
  require(start.grid() == cfg.spec.grid() && start.n() == cfg.spec.lie().n(),
          "sample_field: start state does not match the configuration");
  const double dt = cfg.dt();
  const LieBasis& lie = cfg.spec.lie();
  FieldState state = start;
  AlgebraField incr(cfg.spec.grid(), lie.dim());
  for (int s = 0; s < cfg.n_steps; ++s) {
    const std::vector<double> coeffs = draw_coefficients(cfg.spec, dt, stream);
    synthesize(cfg.spec, coeffs, incr, exec);
    step_inplace(state, incr, dt, lie, exec);
    check_finite(state, s);
  }
  // Exact terminal time rather than the accumulated sum of steps.
  state.set_time(start.time() + cfg.t_end);
  return state;
}

FieldState sample_field(const SdeConfig& cfg, RngStream stream, Exec exec) {
  return sample_field(cfg, initial_state(cfg.spec.grid(), cfg.spec.lie().n()), std::move(stream), exec);
}

FieldState sample_field(const SdeConfig& cfg) { return sample_field(cfg, substream(cfg.seed, 0)); }

std::vector<FieldState> sample_ensemble_fields(const SdeConfig& cfg, int n_samples, Exec exec,
                                               std::uint64_t first) {
  require(n_samples >= 1, "n_samples must be >= 1");
  cfg.validate();
  std::vector<FieldState> out(static_cast<std::size_t>(n_samples),
                              FieldState(cfg.spec.grid(), cfg.spec.lie().n()));
  if (exec == Exec::parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n_samples; ++i) {
      try {
        out[static_cast<std::size_t>(i)] = sample_field(cfg, substream(cfg.seed, first + i));
      } catch (...) {
#pragma omp critical(hkcg_ensemble_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (int i = 0; i < n_samples; ++i)
      out[static_cast<std::size_t>(i)] = sample_field(cfg, substream(cfg.seed, first + i));
  }
  return out;
}

std::vector<Complex> sample_field_at(const SdeConfig& cfg, RngStream stream,
                                     std::span<const int> points) {
  cfg.validate();
  const LieBasis& lie = cfg.spec.lie();
  const int n = lie.n();
  const int n2 = n * n;
  const int dim = lie.dim();
  const double dt = cfg.dt();
  std::vector<Complex> g(points.size() * static_cast<std::size_t>(n2));
  for (std::size_t j = 0; j < points.size(); ++j)
    for (int r = 0; r < n; ++r) g[j * n2 + static_cast<std::size_t>(r) * n + r] = 1.0;
  std::vector<Complex> scratch(static_cast<std::size_t>(n2));
  for (int s = 0; s < cfg.n_steps; ++s) {
    const std::vector<double> incr = sample_increment_at(cfg.spec, dt, stream, points);
    for (std::size_t j = 0; j < points.size(); ++j) {
      right_multiply_exp(lie, std::span<const double>(incr.data() + j * dim, static_cast<std::size_t>(dim)),
                         std::span<Complex>(g.data() + j * n2, static_cast<std::size_t>(n2)), scratch);
    }
  }
  return g;
}

std::vector<Complex> simulate_point(const LieBasis& lie, double variance, int n_steps, double t_end,
                                    RngStream& stream, std::vector<double>* increments) {
  require(n_steps >= 1 && t_end >= 0.0 && variance >= 0.0, "simulate_point: invalid parameters");
  const int n = lie.n();
  const int dim = lie.dim();
  const double scale = std::sqrt(variance * t_end / n_steps);
  std::vector<Complex> g(static_cast<std::size_t>(n * n));
  for (int r = 0; r < n; ++r) g[static_cast<std::size_t>(r) * n + r] = 1.0;
  std::vector<Complex> scratch(g.size());
  std::vector<double> x(static_cast<std::size_t>(dim));
  if (increments) increments->resize(static_cast<std::size_t>(n_steps) * dim);
  for (int s = 0; s < n_steps; ++s) {
    for (int a = 0; a < dim; ++a) x[a] = scale * stream.normal();
    if (increments) std::copy(x.begin(), x.end(), increments->begin() + static_cast<std::ptrdiff_t>(s) * dim);
    right_multiply_exp(lie, x, g, scratch);
  }
  return g;
}

std::vector<Complex> integrate_point_increments(const LieBasis& lie, std::span<const double> increments,
                                                int group) {
  const int n = lie.n();
  const int dim = lie.dim();
  require(group >= 1, "integrate_point_increments: group must be >= 1");
  const std::size_t fine_steps = increments.size() / dim;
  require(fine_steps * dim == increments.size() && fine_steps % group == 0,
          "integrate_point_increments: increment count not divisible by group");
  std::vector<Complex> g(static_cast<std::size_t>(n * n));
  for (int r = 0; r < n; ++r) g[static_cast<std::size_t>(r) * n + r] = 1.0;
  std::vector<Complex> scratch(g.size());
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (std::size_t s = 0; s < fine_steps; s += group) {
    std::fill(x.begin(), x.end(), 0.0);
    for (int j = 0; j < group; ++j)
      for (int a = 0; a < dim; ++a) x[a] += increments[(s + j) * dim + a];
    right_multiply_exp(lie, x, g, scratch);
  }
  return g;
}

Drift measure_drift(const FieldState& state) {
  // NaN entries count as infinite drift.
  auto raise = [](double& acc, double v) { acc = std::isnan(v) ? INFINITY : std::max(acc, v); };
  Drift drift;
  for (int p = 0; p < state.points(); ++p) {
    raise(drift.unitarity, unitarity_defect(state.at(p), state.n()));
    raise(drift.determinant, determinant_defect(state.at(p), state.n()));
  }
  return drift;
}

}  // namespace hkcg
