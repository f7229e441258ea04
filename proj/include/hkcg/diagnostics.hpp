#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hkcg/extension.hpp"
#include "hkcg/sampler.hpp"

namespace hkcg {

// One verification outcome.  pass <=> !inconclusive and
// |estimate - target| <= max(sigma_multiplier * std_error, abs_tolerance).
struct StatReport {
  std::string name;
  double estimate = 0.0;
  double target = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  bool pass = false;
  std::string tolerance_rule;

  double abs_tolerance = 0.0;
  double sigma_multiplier = 4.0;
  bool inconclusive = false;

  // Recomputes `pass` from the fields above.
  void evaluate();
};

// JSON array, one object per report with keys
// name, estimate, target, stderr, n_samples, pass, tolerance_rule.
std::string reports_to_json(const std::vector<StatReport>& reports);

// 2 exp(-(3/8) c t) for SU(2) with the chosen basis (Casimir -3/4).
double su2_character_target(double pointwise_variance, double t_end);

// Exact expectation of Re tr g_n(S) under n exponential-Euler steps for
// SU(2): 2 [(1 - s/4) exp(-s/8)]^n with s = c t / n.
double su2_scheme_character_mean(double pointwise_variance, double t_end, int n_steps);

enum class PointDriver {
  karhunen_loeve,  // full spectral draws evaluated at S
  marginal,        // N(0, c dt) per direction, identical in law at a single point
};

StatReport character_test(const SdeConfig& cfg, int point, std::int64_t n_samples,
                          PointDriver driver = PointDriver::karhunen_loeve);

// Log-field covariance at each pair (S, S') against t C_k(S,S') delta_ab,
// pooled over Lie directions and torus translations of the pair; the last
// report checks the cross-direction covariance of the first pair.
// Pairs (0, j) along axis 0, j in {0, 1, 2, 4, ...} below P/2, keeping those
// with |C_k(0,j)| > threshold * C_k(0,0).
std::vector<std::pair<int, int>> dominant_pairs(const CovarianceSpec& spec, double threshold = 0.1);

std::vector<StatReport> covariance_test(const SdeConfig& cfg, const std::vector<std::pair<int, int>>& pairs,
                                        std::int64_t n_samples, double rel_tolerance = 0.05);

struct OrderEstimate {
  StatReport report;
  std::vector<int> levels;
  std::vector<double> errors;
  std::vector<double> error_std;
};

// Weak order of the character observable at one point, common random
// numbers across levels.  Needs >= 3 levels dividing the finest one.
OrderEstimate weak_order_test(const SdeConfig& cfg, std::vector<int> step_ladder, std::int64_t n_samples);

// Strong self-convergence: E||g_n - g_2n||_F for coupled paths.
OrderEstimate strong_order_test(const SdeConfig& cfg, std::vector<int> step_ladder, std::int64_t n_samples);

struct RegularityOptions {
  int d = 1;
  int n = 2;
  int derivative_order = 1;
  std::vector<int> k_values{0, 2};
  std::vector<int> grid_ladder{32, 64, 128};
  double t_end = 0.005;
  int n_steps = 4;
  std::int64_t n_samples = 2000;
  std::uint64_t seed = 0;
};

// Closed truncated sum t (2pi)^{-d} sum_m w_m sigma_h(m_0)^{2r}, sigma_h the
// symbol of the forward difference along axis 0 on a grid with spacing h.
double regularity_closed_sum(int d, int k, int max_mode, int points_per_axis, int r, double t);
// Same without the difference symbol: t (2pi)^{-d} sum_m w_m |m_0|^{2r}.
double regularity_continuum_sum(int d, int k, int max_mode, int r, double t);

std::vector<StatReport> regularity_probe(const RegularityOptions& options);

StatReport drift_report(const FieldState& state);

// Cocycle identities on random band-limited fields.
std::vector<StatReport> cocycle_suite(const LieBasis& lie, const TorusGrid& grid, int band, int n_triples,
                                      std::uint64_t seed);

// Haar sampling and product-measure checks for the extension.
std::vector<StatReport> extension_suite(const SdeConfig& cfg, const LatticeSpec& lattice, std::int64_t n_samples);

// Extended SDE on Z: KS distance to uniform at several times.
std::vector<StatReport> central_mixing_test(const LatticeSpec& lattice, const std::vector<double>& times,
                                            double dt, double sigma, std::int64_t n_samples, std::uint64_t seed);

// tr(g_1) started from a vs tr(a g_1) started from e, independent seeds.
StatReport left_invariance_test(const SdeConfig& cfg, const GroupElement& a, int point, std::int64_t n_samples);

// Kolmogorov-Smirnov helpers.
double ks_statistic_uniform(std::vector<double> samples);
double ks_statistic(std::vector<double> samples, double (*cdf)(double, const void*), const void* ctx);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
// P(D > d) for the one-sample statistic with n samples.
double ks_pvalue(double d, double effective_n);
double ks_critical_value(double alpha, double effective_n);
// CDF of a normal with variance `variance` wrapped onto [0, 1).
double wrapped_normal_cdf(double x, double variance);

}  // namespace hkcg
