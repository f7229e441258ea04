#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hkcg/brownian.hpp"
#include "hkcg/exec.hpp"
#include "hkcg/lie.hpp"
#include "hkcg/rng.hpp"
#include "hkcg/torus.hpp"

namespace hkcg {

// Random field S -> g_t(S) with values in SU(n), stored as row-major n x n
// blocks, one per grid point: data[point][row][col].
class FieldState {
 public:
  FieldState(TorusGrid grid, int n, double t = 0.0);

  const TorusGrid& grid() const { return grid_; }
  int n() const { return n_; }
  int points() const { return grid_.size(); }
  double time() const { return t_; }
  void set_time(double t) { t_ = t; }

  std::span<Complex> at(int point) {
    return {data_.data() + static_cast<std::size_t>(point) * n_ * n_, static_cast<std::size_t>(n_ * n_)};
  }
  std::span<const Complex> at(int point) const {
    return {data_.data() + static_cast<std::size_t>(point) * n_ * n_, static_cast<std::size_t>(n_ * n_)};
  }
  GroupElement element(int point) const;

  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

 private:
  TorusGrid grid_;
  int n_;
  double t_;
  std::vector<Complex> data_;
};

struct SdeConfig {
  CovarianceSpec spec;
  int n_steps = 256;
  double t_end = 1.0;
  std::uint64_t seed = 0;

  double dt() const { return t_end / n_steps; }
  void validate() const;
};

// g_0(S) = e at every point.
FieldState initial_state(const TorusGrid& grid, int n);
// g_0(S) = a at every point.
FieldState initial_state(const TorusGrid& grid, const GroupElement& a);

// In-place exponential-Euler step g(S) <- g(S) exp(dB(S)), t <- t + dt.
void step_inplace(FieldState& state, const AlgebraField& incr, double dt, const LieBasis& lie,
                  Exec exec = Exec::serial);
FieldState step(const FieldState& state, const AlgebraField& incr, double dt, const LieBasis& lie,
                Exec exec = Exec::serial);

// Integrates from `start` (identity when omitted) over cfg.n_steps equal
// steps, drawing every increment from `stream`.  Throws NonFiniteError if a
// non-finite entry appears.
FieldState sample_field(const SdeConfig& cfg, RngStream stream, Exec exec = Exec::serial);
FieldState sample_field(const SdeConfig& cfg, const FieldState& start, RngStream stream,
                        Exec exec = Exec::serial);
// Uses substream(cfg.seed, 0).
FieldState sample_field(const SdeConfig& cfg);

// Sample i is drawn from substream(cfg.seed, first + i).  With Exec::parallel
// samples are distributed over OpenMP threads; output is identical.
std::vector<FieldState> sample_ensemble_fields(const SdeConfig& cfg, int n_samples,
                                               Exec exec = Exec::serial, std::uint64_t first = 0);

// Terminal field restricted to `points`, from the same Karhunen-Loeve draws as
// sample_field (bit-identical at those points).  Layout [point][row][col].
std::vector<Complex> sample_field_at(const SdeConfig& cfg, RngStream stream,
                                     std::span<const int> points);

// Single-point path driven directly by the marginal law of the increment at
// one point, dB ~ N(0, variance * dt) per direction (identical in law to the
// Karhunen-Loeve increment at any fixed S with variance = C_k(S,S)).
// `increments` receives n_steps * dim normals scaled by sqrt(variance * dt)
// when non-null.
std::vector<Complex> simulate_point(const LieBasis& lie, double variance, int n_steps, double t_end,
                                    RngStream& stream, std::vector<double>* increments = nullptr);

// Product of exp(increment_j) over consecutive groups of `group` increments
// summed together; used to build coupled coarse paths from fine increments.
std::vector<Complex> integrate_point_increments(const LieBasis& lie, std::span<const double> increments,
                                                int group);

// Max over grid points of the unitarity and determinant defects.
struct Drift {
  double unitarity = 0.0;
  double determinant = 0.0;
};
Drift measure_drift(const FieldState& state);

}  // namespace hkcg
