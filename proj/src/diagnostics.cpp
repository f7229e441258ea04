#include "hkcg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hkcg/error.hpp"

namespace hkcg {

namespace {

constexpr int kBatches = 64;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Splits [0, n) into a fixed number of contiguous batches, runs them over
// OpenMP threads and returns per-batch accumulators.  The partition and the
// summation order inside a batch do not depend on the thread count.
template <class Fn>
std::vector<std::vector<double>> run_batches(std::int64_t n, int width, Fn&& fn) {
  const int batches = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(n, kBatches)));
  std::vector<std::vector<double>> acc(static_cast<std::size_t>(batches),
                                       std::vector<double>(static_cast<std::size_t>(width), 0.0));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (int b = 0; b < batches; ++b) {
    try {
      const std::int64_t begin = n * b / batches;
      const std::int64_t end = n * (b + 1) / batches;
      for (std::int64_t i = begin; i < end; ++i) fn(i, acc[static_cast<std::size_t>(b)]);
    } catch (...) {
#pragma omp critical(hkcg_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return acc;
}

std::vector<double> column_sums(const std::vector<std::vector<double>>& acc) {
  std::vector<double> total(acc.front().size(), 0.0);
  for (const auto& row : acc)
    for (std::size_t j = 0; j < row.size(); ++j) total[j] += row[j];
  return total;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// i.i.d. mean and standard error from a sum and a sum of squares.
MeanSe iid_mean(double sum, double sum_sq, double n) {
  MeanSe out;
  out.mean = sum / n;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1));
    out.se = std::sqrt(var / n);
  }
  return out;
}

// Ratio estimator sum(num)/sum(den) with a batch-means standard error.
MeanSe batch_ratio(const std::vector<std::vector<double>>& acc, std::size_t num, std::size_t den) {
  double total_num = 0.0, total_den = 0.0;
  for (const auto& row : acc) {
    total_num += row[num];
    total_den += row[den];
  }
  MeanSe out;
  out.mean = total_den > 0 ? total_num / total_den : 0.0;
  std::vector<double> means;
  for (const auto& row : acc)
    if (row[den] > 0) means.push_back(row[num] / row[den]);
  const auto b = static_cast<double>(means.size());
  if (b > 1) {
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / b;
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    out.se = std::sqrt(ss / (b - 1) / b);
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double real_trace(std::span<const Complex> g, int n) {
  double tr = 0.0;
  for (int r = 0; r < n; ++r) tr += g[static_cast<std::size_t>(r) * n + r].real();
  return tr;
}

struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
};

// Least-squares slope of y on x; se propagated from independent y errors.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& y_se) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = (x[i] - mx) / sxx;
    var += w * w * y_se[i] * y_se[i];
  }
  fit.se = std::sqrt(var);
  return fit;
}

std::vector<int> validated_ladder(std::vector<int> ladder) {
  require(ladder.size() >= 3, "convergence ladder needs at least 3 levels (got " + std::to_string(ladder.size()) + ")");
  std::sort(ladder.begin(), ladder.end());
  require(std::adjacent_find(ladder.begin(), ladder.end()) == ladder.end(), "convergence ladder has repeated levels");
  require(ladder.front() >= 1, "convergence ladder levels must be >= 1");
  for (int level : ladder)
    require(ladder.back() % level == 0, "every ladder level must divide the finest level " + std::to_string(ladder.back()));
  return ladder;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Log-field of a full state; returns false if any point is outside the
// principal-log domain.
bool log_field(const LieBasis& lie, const FieldState& state, std::vector<double>& out) {
  const int dim = lie.dim();
  out.resize(static_cast<std::size_t>(state.points()) * dim);
  for (int p = 0; p < state.points(); ++p) {
    if (!lie.log_into(state.at(p), std::span<double>(out.data() + static_cast<std::size_t>(p) * dim,
                                                      static_cast<std::size_t>(dim))))
      return false;
  }
  return true;
}

}  // namespace

void StatReport::evaluate() {
  pass = !inconclusive && std::isfinite(estimate) &&
         std::abs(estimate - target) <= std::max(sigma_multiplier * std_error, abs_tolerance);
}

std::string reports_to_json(const std::vector<StatReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["estimate"] = r.estimate;
    j["target"] = r.target;
    j["stderr"] = r.std_error;
    j["n_samples"] = r.n_samples;
    j["pass"] = r.pass;
    j["tolerance_rule"] = r.tolerance_rule;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

double su2_character_target(double pointwise_variance, double t_end) {
  return 2.0 * std::exp(-0.375 * pointwise_variance * t_end);
}

double su2_scheme_character_mean(double pointwise_variance, double t_end, int n_steps) {
  const double s = pointwise_variance * t_end / n_steps;
  return 2.0 * std::pow((1.0 - 0.25 * s) * std::exp(-0.125 * s), n_steps);
}

StatReport character_test(const SdeConfig& cfg, int point, std::int64_t n_samples, PointDriver driver) {
  const LieBasis& lie = cfg.spec.lie();
  require(lie.n() == 2, "character_test: analytic target implemented for SU(2) only");
  require(n_samples >= 2, "character_test: need at least 2 samples");
  require(point >= 0 && point < cfg.spec.grid().size(), "character_test: grid point out of range");
  const double c = covariance_kernel(cfg.spec, point, point);

  StatReport report;
  report.name = "character";
  report.n_samples = n_samples;
  report.target = su2_character_target(c, cfg.t_end);
  report.sigma_multiplier = 4.0;
  report.tolerance_rule = "|E[Re tr g(S)] - 2 exp(-3 c t/8)| <= 4*stderr, c = C_k(S,S)";
  if (cfg.t_end == 0.0) {
    report.estimate = 2.0;
    report.evaluate();
    return report;
  }
  cfg.validate();
  const std::vector<int> points{point};
  const auto acc = run_batches(n_samples, 2, [&](std::int64_t i, std::vector<double>& a) {
    RngStream stream = substream(cfg.seed, static_cast<std::uint64_t>(i));
    const std::vector<Complex> g = driver == PointDriver::karhunen_loeve
                                       ? sample_field_at(cfg, stream, points)
                                       : simulate_point(lie, c, cfg.n_steps, cfg.t_end, stream);
    const double v = real_trace(g, 2);
    a[0] += v;
    a[1] += v * v;
  });
  const auto total = column_sums(acc);
  const MeanSe m = iid_mean(total[0], total[1], static_cast<double>(n_samples));
  report.estimate = m.mean;
  report.std_error = m.se;
  report.evaluate();
  return report;
}

std::vector<std::pair<int, int>> dominant_pairs(const CovarianceSpec& spec, double threshold) {
  const TorusGrid& grid = spec.grid();
  const double c0 = covariance_kernel(spec, 0, 0);
  std::vector<std::pair<int, int>> pairs{{0, 0}};
  for (int j = 1; j < grid.points_per_axis() / 2; j *= 2) {
    const int q = j * grid.stride(0);
    if (std::abs(covariance_kernel(spec, 0, q)) > threshold * c0) pairs.emplace_back(0, q);
  }
  return pairs;
}

std::vector<StatReport> covariance_test(const SdeConfig& cfg, const std::vector<std::pair<int, int>>& pairs,
                                        std::int64_t n_samples, double rel_tolerance) {
  cfg.validate();
  require(!pairs.empty(), "covariance_test: no point pairs given");
  require(n_samples >= 2, "covariance_test: need at least 2 samples");
  const TorusGrid& grid = cfg.spec.grid();
  const LieBasis& lie = cfg.spec.lie();
  const int dim = lie.dim();
  const int npts = grid.size();

  // Translates (S + tau, S' + tau) of every requested pair.
  std::vector<std::vector<std::pair<int, int>>> translates(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto [s, s2] = pairs[j];
    require(s >= 0 && s < npts && s2 >= 0 && s2 < npts, "covariance_test: grid point out of range");
    const auto ms = grid.multi_index(s);
    const auto ms2 = grid.multi_index(s2);
    for (int tau = 0; tau < npts; ++tau) {
      const auto mt = grid.multi_index(tau);
      std::array<int, 3> a{}, b{};
      for (int axis = 0; axis < 3; ++axis) {
        a[axis] = ms[axis] + mt[axis];
        b[axis] = ms2[axis] + mt[axis];
      }
      translates[j].emplace_back(grid.linear_index(a), grid.linear_index(b));
    }
  }

  // Columns: 0 good samples, 1 failed samples, then per pair the pooled
  // same-direction product sum, then the cross-direction sum of pair 0.
  const std::size_t width = 2 + pairs.size() + 1;
  const auto acc = run_batches(n_samples, static_cast<int>(width), [&](std::int64_t i, std::vector<double>& a) {
    const FieldState g = sample_field(cfg, substream(cfg.seed, static_cast<std::uint64_t>(i)));
    std::vector<double> logs;
    if (!log_field(lie, g, logs)) {
      a[1] += 1.0;
      return;
    }
    a[0] += 1.0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      double s = 0.0;
      for (const auto& [p, q] : translates[j])
        for (int c = 0; c < dim; ++c) s += logs[static_cast<std::size_t>(p) * dim + c] * logs[static_cast<std::size_t>(q) * dim + c];
      a[2 + j] += s;
    }
    double cross = 0.0;
    for (const auto& [p, q] : translates[0])
      for (int c = 0; c < dim; ++c)
        for (int e = 0; e < dim; ++e)
          if (c != e) cross += logs[static_cast<std::size_t>(p) * dim + c] * logs[static_cast<std::size_t>(q) * dim + e];
    a[2 + pairs.size()] += cross;
  });

  const auto total = column_sums(acc);
  const double failed = total[1];
  const double fail_rate = failed / static_cast<double>(n_samples);
  const bool too_many_failures = fail_rate > 0.01;
  const double c_diag = covariance_kernel(cfg.spec, pairs.front().first, pairs.front().first);

  // Per-batch normalisers: products per sample.
  auto normalised = [&](std::size_t column, double per_sample) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : acc) rows.push_back({row[column], row[0] * per_sample});
    return batch_ratio(rows, 0, 1);
  };

  std::vector<StatReport> reports;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto [s, s2] = pairs[j];
    const double ck = covariance_kernel(cfg.spec, s, s2);
    const MeanSe est = normalised(2 + j, static_cast<double>(translates[j].size()) * dim);
    StatReport r;
    r.name = "covariance S=" + std::to_string(s) + " S'=" + std::to_string(s2);
    r.estimate = est.mean;
    r.std_error = est.se;
    r.target = cfg.t_end * ck;
    r.n_samples = n_samples;
    if (std::abs(ck) > 0.1 * c_diag) {
      r.abs_tolerance = rel_tolerance * std::abs(r.target);
      r.tolerance_rule = "|cov - t C_k(S,S')| <= max(4*stderr, " + fmt(rel_tolerance) + "*|t C_k(S,S')|)";
    } else {
      r.sigma_multiplier = 4.0;
      r.tolerance_rule = "|cov - t C_k(S,S')| <= 4*stderr (|C_k| <= 0.1 C_k(S,S))";
    }
    r.tolerance_rule += "; pooled over directions and translations; log failures " + fmt(failed);
    r.inconclusive = too_many_failures;
    r.evaluate();
    reports.push_back(std::move(r));
  }
  if (dim > 1) {
    const MeanSe est = normalised(2 + pairs.size(), static_cast<double>(translates[0].size()) * dim * (dim - 1));
    StatReport r;
    r.name = "covariance cross-direction S=" + std::to_string(pairs[0].first) + " S'=" + std::to_string(pairs[0].second);
    r.estimate = est.mean;
    r.std_error = est.se;
    r.target = 0.0;
    r.n_samples = n_samples;
    r.sigma_multiplier = 4.0;
    r.tolerance_rule = "|cov_ab| <= 4*stderr for a != b";
    r.inconclusive = too_many_failures;
    r.evaluate();
    reports.push_back(std::move(r));
  }
  return reports;
}

OrderEstimate weak_order_test(const SdeConfig& cfg, std::vector<int> step_ladder, std::int64_t n_samples) {
  const std::vector<int> ladder = validated_ladder(std::move(step_ladder));
  cfg.validate();
  const LieBasis& lie = cfg.spec.lie();
  require(lie.n() == 2, "weak_order_test: analytic target implemented for SU(2) only");
  require(n_samples >= 2, "weak_order_test: need at least 2 samples");
  const double c = pointwise_variance(cfg.spec);
  const double target = su2_character_target(c, cfg.t_end);
  const int finest = ladder.back();
  const std::size_t levels = ladder.size();

  const auto acc = run_batches(n_samples, static_cast<int>(2 * levels), [&](std::int64_t i, std::vector<double>& a) {
    RngStream stream = substream(cfg.seed, static_cast<std::uint64_t>(i));
    std::vector<double> incr;
    const std::vector<Complex> g_fine = simulate_point(lie, c, finest, cfg.t_end, stream, &incr);
    for (std::size_t l = 0; l < levels; ++l) {
      const double v = ladder[l] == finest ? real_trace(g_fine, 2)
                                           : real_trace(integrate_point_increments(lie, incr, finest / ladder[l]), 2);
      a[l] += v;
      a[levels + l] += v * v;
    }
  });
  const auto total = column_sums(acc);

  OrderEstimate out;
  out.levels = ladder;
  std::vector<double> x, y, y_se;
  bool signal = true;
  for (std::size_t l = 0; l < levels; ++l) {
    const MeanSe m = iid_mean(total[l], total[levels + l], static_cast<double>(n_samples));
    const double bias = m.mean - target;
    out.errors.push_back(bias);
    out.error_std.push_back(m.se);
    if (!(std::abs(bias) >= 4.0 * m.se) || bias == 0.0) signal = false;
    x.push_back(std::log(cfg.t_end / ladder[l]));
    y.push_back(std::log(std::abs(bias)));
    y_se.push_back(bias != 0.0 ? m.se / std::abs(bias) : INFINITY);
  }
  const SlopeFit fit = fit_slope(x, y, y_se);
  StatReport& r = out.report;
  r.name = "weak-order";
  r.estimate = fit.slope;
  r.std_error = fit.se;
  r.target = 1.0;
  r.abs_tolerance = 0.3;
  r.n_samples = n_samples;
  r.inconclusive = !signal;
  r.tolerance_rule = std::string("|slope - 1| <= max(4*stderr, 0.3); log|E[Re tr g_n] - 2exp(-3ct/8)| vs log dt, common random numbers") +
                     (signal ? "" : "; INCONCLUSIVE: bias below 4 Monte Carlo standard errors at some level");
  r.evaluate();
  return out;
}

OrderEstimate strong_order_test(const SdeConfig& cfg, std::vector<int> step_ladder, std::int64_t n_samples) {
  const std::vector<int> ladder = validated_ladder(std::move(step_ladder));
  cfg.validate();
  require(n_samples >= 2, "strong_order_test: need at least 2 samples");
  const LieBasis& lie = cfg.spec.lie();
  const int n = lie.n();
  const double c = pointwise_variance(cfg.spec);
  const int finest = ladder.back();
  const std::size_t pairs = ladder.size() - 1;

  const auto acc = run_batches(n_samples, static_cast<int>(2 * pairs), [&](std::int64_t i, std::vector<double>& a) {
    RngStream stream = substream(cfg.seed, static_cast<std::uint64_t>(i));
    std::vector<double> incr;
    const std::vector<Complex> g_fine = simulate_point(lie, c, finest, cfg.t_end, stream, &incr);
    std::vector<std::vector<Complex>> g(ladder.size());
    for (std::size_t l = 0; l < ladder.size(); ++l)
      g[l] = ladder[l] == finest ? g_fine : integrate_point_increments(lie, incr, finest / ladder[l]);
    for (std::size_t l = 0; l < pairs; ++l) {
      double sq = 0.0;
      for (int e = 0; e < n * n; ++e) sq += std::norm(g[l][static_cast<std::size_t>(e)] - g[l + 1][static_cast<std::size_t>(e)]);
      const double err = std::sqrt(sq);
      a[l] += err;
      a[pairs + l] += err * err;
    }
  });
  const auto total = column_sums(acc);

  OrderEstimate out;
  out.levels.assign(ladder.begin(), ladder.end() - 1);
  std::vector<double> x, y, y_se;
  for (std::size_t l = 0; l < pairs; ++l) {
    const MeanSe m = iid_mean(total[l], total[pairs + l], static_cast<double>(n_samples));
    out.errors.push_back(m.mean);
    out.error_std.push_back(m.se);
    x.push_back(std::log(cfg.t_end / ladder[l]));
    y.push_back(std::log(m.mean));
    y_se.push_back(m.se / m.mean);
  }
  const SlopeFit fit = fit_slope(x, y, y_se);
  StatReport& r = out.report;
  r.name = "strong-order";
  r.estimate = fit.slope;
  r.std_error = fit.se;
  r.target = 0.5;
  r.abs_tolerance = 0.1;
  r.n_samples = n_samples;
  r.tolerance_rule = "|slope - 0.5| <= max(4*stderr, 0.1); log E||g_n - g_2n||_F vs log dt, coupled paths";
  r.evaluate();
  return out;
}

namespace {

template <class Symbol>
double regularity_sum(int d, int k, int max_mode, int r, double t, Symbol&& symbol) {
  const int side = 2 * max_mode + 1;
  int total = 1;
  for (int i = 0; i < d; ++i) total *= side;
  double acc = 0.0;
  for (int code = 0; code < total; ++code) {
    int rest = code;
    std::array<int, 3> m{};
    for (int axis = d - 1; axis >= 0; --axis) {
      m[axis] = rest % side - max_mode;
      rest /= side;
    }
    const double lambda = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
    const double w = 1.0 / ((k == 0 ? 1.0 : std::pow(lambda, k)) + 1.0);
    acc += w * (r == 0 ? 1.0 : std::pow(symbol(m[0]), 2 * r));
  }
  return t * acc / std::pow(kTwoPi, d);
}

}  // namespace

double regularity_closed_sum(int d, int k, int max_mode, int points_per_axis, int r, double t) {
  const double h = kTwoPi / points_per_axis;
  return regularity_sum(d, k, max_mode, r, t, [h](int m) { return 2.0 * std::abs(std::sin(0.5 * m * h)) / h; });
}

double regularity_continuum_sum(int d, int k, int max_mode, int r, double t) {
  return regularity_sum(d, k, max_mode, r, t, [](int m) { return static_cast<double>(std::abs(m)); });
}

std::vector<StatReport> regularity_probe(const RegularityOptions& opt) {
  require(opt.derivative_order >= 0, "regularity_probe: derivative order must be >= 0");
  require(opt.grid_ladder.size() >= 2, "regularity_probe: grid ladder needs at least 2 levels");
  require(opt.n_samples >= 2, "regularity_probe: need at least 2 samples");
  const auto lie = std::make_shared<const LieBasis>(opt.n);
  const int dim = lie->dim();
  const int r = opt.derivative_order;
  std::vector<double> binom(static_cast<std::size_t>(r + 1));
  for (int j = 0; j <= r; ++j) binom[static_cast<std::size_t>(j)] = std::tgamma(r + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(r - j + 1.0));

  std::vector<StatReport> reports;
  for (int k : opt.k_values) {
    std::vector<MeanSe> level_var;
    std::vector<double> level_closed;
    bool any_inconclusive = false;
    for (int p_axis : opt.grid_ladder) {
      const int max_mode = p_axis / 4;
      auto basis = std::make_shared<const SpectralBasis>(TorusGrid(opt.d, p_axis), max_mode);
      CovarianceSpec spec = k == 0 ? CovarianceSpec::white_noise_control(basis, lie) : CovarianceSpec(k, basis, lie);
      const SdeConfig cfg{spec, opt.n_steps, opt.t_end, opt.seed};
      const TorusGrid& grid = spec.grid();
      const double h = grid.spacing();
      const int stride = grid.stride(0);
      const auto acc = run_batches(opt.n_samples, 3, [&](std::int64_t i, std::vector<double>& a) {
        const FieldState g = sample_field(cfg, substream(cfg.seed, static_cast<std::uint64_t>(i)));
        std::vector<double> logs;
        if (!log_field(*lie, g, logs)) {
          a[2] += 1.0;
          return;
        }
        double ss = 0.0;
        for (int p = 0; p < grid.size(); ++p) {
          const int k0 = (p / stride) % p_axis;
          const int base = p - k0 * stride;
          for (int c = 0; c < dim; ++c) {
            double diff = 0.0;
            for (int j = 0; j <= r; ++j) {
              const int q = base + ((k0 + j) % p_axis) * stride;
              const double sign = ((r - j) % 2 == 0) ? 1.0 : -1.0;
              diff += sign * binom[static_cast<std::size_t>(j)] * logs[static_cast<std::size_t>(q) * dim + c];
            }
            diff /= std::pow(h, r);
            ss += diff * diff;
          }
        }
        a[0] += ss;
        a[1] += static_cast<double>(grid.size()) * dim;
      });
      const auto total = column_sums(acc);
      const bool inconclusive = total[2] / static_cast<double>(opt.n_samples) > 0.01;
      any_inconclusive = any_inconclusive || inconclusive;
      const MeanSe var = batch_ratio(acc, 0, 1);
      const double closed = regularity_closed_sum(opt.d, k, max_mode, p_axis, r, opt.t_end);
      level_var.push_back(var);
      level_closed.push_back(closed);

      StatReport rep;
      rep.name = "regularity k=" + std::to_string(k) + " r=" + std::to_string(r) + " P=" + std::to_string(p_axis) + " variance";
      rep.estimate = var.mean;
      rep.std_error = var.se;
      rep.target = closed;
      rep.abs_tolerance = 0.1 * closed;
      rep.n_samples = opt.n_samples;
      rep.inconclusive = inconclusive;
      rep.tolerance_rule = "|var - closed truncated sum| <= max(4*stderr, 0.1*closed) (continuum sum " +
                           fmt(regularity_continuum_sum(opt.d, k, max_mode, r, opt.t_end)) + "); log failures " + fmt(total[2]);
      rep.evaluate();
      reports.push_back(std::move(rep));
    }
    const bool smooth = k >= 1 && 2 * k > opt.d + 2 * r;
    for (std::size_t l = 1; l < level_var.size(); ++l) {
      const double ratio = level_var[l].mean / level_var[l - 1].mean;
      const double rel = std::hypot(level_var[l].se / level_var[l].mean, level_var[l - 1].se / level_var[l - 1].mean);
      const double closed_ratio = level_closed[l] / level_closed[l - 1];
      StatReport rep;
      rep.name = "regularity k=" + std::to_string(k) + " r=" + std::to_string(r) + " ratio P=" +
                 std::to_string(opt.grid_ladder[l - 1]) + "->" + std::to_string(opt.grid_ladder[l]);
      rep.estimate = ratio;
      rep.std_error = ratio * rel;
      rep.n_samples = opt.n_samples;
      rep.inconclusive = any_inconclusive;
      if (smooth) {
        rep.target = 1.0;
        rep.abs_tolerance = 0.1;
        rep.tolerance_rule = "|ratio - 1| <= max(4*stderr, 0.1) (2k > d + 2r); closed-sum ratio " + fmt(closed_ratio);
      } else {
        rep.target = closed_ratio;
        rep.abs_tolerance = 0.1 * closed_ratio;
        rep.tolerance_rule = "|ratio - closed-sum ratio| <= max(4*stderr, 0.1*closed-sum ratio) (2k <= d + 2r)";
      }
      rep.evaluate();
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

StatReport drift_report(const FieldState& state) {
  const Drift drift = measure_drift(state);
  StatReport r;
  r.name = "drift";
  r.estimate = std::max(drift.unitarity, drift.determinant);
  r.target = 0.0;
  r.sigma_multiplier = 0.0;
  r.abs_tolerance = 1e-10;
  r.n_samples = state.points();
  r.tolerance_rule = "max_S max(||g^dagger g - I||_F, |det g - 1|) <= 1e-10; unitarity " + fmt(drift.unitarity) +
                     ", determinant " + fmt(drift.determinant);
  r.evaluate();
  return r;
}

namespace {

StatReport exact_report(std::string name, double estimate, double target, double tol, std::int64_t n,
                        std::string rule) {
  StatReport r;
  r.name = std::move(name);
  r.estimate = estimate;
  r.target = target;
  r.abs_tolerance = tol;
  r.sigma_multiplier = 0.0;
  r.n_samples = n;
  r.tolerance_rule = std::move(rule);
  r.evaluate();
  return r;
}

double max_abs(const CohomologyVector& v) {
  double m = 0.0;
  for (double x : v.coords) m = std::max(m, std::abs(x));
  return m;
}

CohomologyVector add(const CohomologyVector& a, const CohomologyVector& b, double scale_b = 1.0) {
  CohomologyVector out = a;
  for (std::size_t i = 0; i < out.coords.size(); ++i) out.coords[i] += scale_b * b.coords[i];
  return out;
}

AlgebraField axpy(double alpha, const AlgebraField& x, const AlgebraField& y) {
  AlgebraField out = y;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += alpha * x.data()[i];
  return out;
}

}  // namespace

std::vector<StatReport> cocycle_suite(const LieBasis& lie, const TorusGrid& grid, int band, int n_triples,
                                      std::uint64_t seed) {
  require(n_triples >= 1, "cocycle_suite: need at least one triple");
  require(band >= 1 && 4 * band < grid.points_per_axis(),
          "cocycle_suite: band must satisfy 1 <= band < P/4 so that pairwise products stay below the Nyquist mode");
  const int dim = lie.dim();
  double leibniz = 0.0, leibniz_sym = 0.0, antisym = 0.0, cyclic = 0.0, jacobi = 0.0, bilinear = 0.0;
  RngStream stream = substream(seed, 0);
  for (int t = 0; t < n_triples; ++t) {
    const AlgebraField x = random_band_limited_field(grid, dim, band, stream);
    const AlgebraField y = random_band_limited_field(grid, dim, band, stream);
    const AlgebraField z = random_band_limited_field(grid, dim, band, stream);
    const double alpha = stream.normal();

    leibniz = std::max(leibniz, leibniz_check(lie, x, y));
    leibniz_sym = std::max(leibniz_sym, leibniz_check(lie, x, x));
    antisym = std::max(antisym, max_abs(add(cocycle(lie, x, y), cocycle(lie, y, x))));

    const AlgebraField xy = pointwise_bracket(lie, x, y);
    const AlgebraField yz = pointwise_bracket(lie, y, z);
    const AlgebraField zx = pointwise_bracket(lie, z, x);
    cyclic = std::max(cyclic, max_abs(add(add(cocycle(lie, xy, z), cocycle(lie, yz, x)), cocycle(lie, zx, y))));

    const AlgebraField j1 = pointwise_bracket(lie, x, yz);
    const AlgebraField j2 = pointwise_bracket(lie, y, zx);
    const AlgebraField j3 = pointwise_bracket(lie, z, xy);
    for (std::size_t i = 0; i < j1.data().size(); ++i)
      jacobi = std::max(jacobi, std::abs(j1.data()[i] + j2.data()[i] + j3.data()[i]));

    const CohomologyVector lhs = cocycle(lie, axpy(alpha, x, z), y);
    const CohomologyVector rhs = add(cocycle(lie, z, y), cocycle(lie, x, y), alpha);
    bilinear = std::max(bilinear, max_abs(add(lhs, rhs, -1.0)));
  }

  // eta = cos(x_0) X, eta1 = sin(x_0) X: axis-0 class kappa(X,X)/2.
  AlgebraField eta(grid, dim), eta1(grid, dim);
  Eigen::VectorXd xdir = Eigen::VectorXd::Zero(dim);
  xdir[0] = 1.0;
  for (int p = 0; p < grid.size(); ++p) {
    const double x0 = grid.coordinate(p, 0);
    for (int a = 0; a < dim; ++a) {
      eta.at(p)[a] = std::cos(x0) * xdir[a];
      eta1.at(p)[a] = std::sin(x0) * xdir[a];
    }
  }
  const double kxx = lie.killing({xdir.data(), static_cast<std::size_t>(dim)}, {xdir.data(), static_cast<std::size_t>(dim)});
  const CohomologyVector explicit_value = cocycle(lie, eta, eta1);

  const std::int64_t n = n_triples;
  return {
      exact_report("cocycle leibniz", leibniz, 0.0, 1e-10, n, "max |d k(eta,eta1) - k(d eta,eta1) - k(eta,d eta1)| <= 1e-10"),
      exact_report("cocycle leibniz symmetric", leibniz_sym, 0.0, 1e-10, n, "max |d k(eta,eta) - 2 k(eta,d eta)| <= 1e-10"),
      exact_report("cocycle antisymmetry", antisym, 0.0, 1e-10, n, "max |c(eta,eta1) + c(eta1,eta)| <= 1e-10"),
      exact_report("cocycle bilinearity", bilinear, 0.0, 1e-10, n, "max |c(a eta + eta', eta1) - a c(eta,eta1) - c(eta',eta1)| <= 1e-10"),
      exact_report("cocycle cyclic identity", cyclic, 0.0, 1e-9, n, "max |sum_cyc c([eta,eta1],eta2)| <= 1e-9"),
      exact_report("extended bracket jacobi", jacobi, 0.0, 1e-9, n, "max |sum_cyc [eta,[eta1,eta2]]| <= 1e-9 (central part: cyclic identity)"),
      exact_report("cocycle explicit T1", explicit_value(0, 0), 0.5 * kxx, 1e-8, 1, "|c(cos x X, sin x X) - k(X,X)/2| <= 1e-8"),
  };
}

double ks_statistic(std::vector<double> samples, double (*cdf)(double, const void*), const void* ctx) {
  require(!samples.empty(), "KS statistic of an empty sample");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i], ctx);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_statistic_uniform(std::vector<double> samples) {
  return ks_statistic(std::move(samples), [](double x, const void*) { return std::clamp(x, 0.0, 1.0); }, nullptr);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "KS two-sample statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue(double d, double effective_n) {
  const double sn = std::sqrt(effective_n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_value(double alpha, double effective_n) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ks_pvalue(mid, effective_n) > alpha) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double wrapped_normal_cdf(double x, double variance) {
  if (variance <= 0.0) return x >= 0.0 ? 1.0 : 0.0;
  const double s = std::sqrt(variance);
  const int reach = static_cast<int>(std::ceil(9.0 * s)) + 2;
  double f = 0.0;
  for (int k = -reach; k <= reach; ++k) f += normal_cdf((k + x) / s) - normal_cdf(k / s);
  return std::clamp(f, 0.0, 1.0);
}

std::vector<StatReport> extension_suite(const SdeConfig& cfg, const LatticeSpec& lattice, std::int64_t n_samples) {
  cfg.validate();
  require(n_samples >= 4, "extension_suite: need at least 4 samples");
  const int dim_z = lattice.dimension();
  const auto n = static_cast<std::size_t>(n_samples);
  std::vector<double> trace(n);
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(dim_z), std::vector<double>(n));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n_samples; ++i) {
    try {
      const ExtendedElement e = sample_extension(cfg, lattice, substream(cfg.seed, static_cast<std::uint64_t>(i)));
      trace[static_cast<std::size_t>(i)] = real_trace(e.field.at(0), e.field.n());
      for (int c = 0; c < dim_z; ++c) coords[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = e.central.coords[static_cast<std::size_t>(c)];
    } catch (...) {
#pragma omp critical(hkcg_extension_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  const double nd = static_cast<double>(n_samples);
  const double dcrit = ks_critical_value(0.01, nd);
  const double corr_tol = 4.0 / std::sqrt(nd);
  const double tmean = std::accumulate(trace.begin(), trace.end(), 0.0) / nd;
  double tvar = 0.0;
  for (double v : trace) tvar += (v - tmean) * (v - tmean);

  std::vector<StatReport> reports;
  for (int c = 0; c < dim_z; ++c) {
    const auto& u = coords[static_cast<std::size_t>(c)];
    const std::string tag = " coord " + std::to_string(c);
    reports.push_back(exact_report("haar ks" + tag, ks_statistic_uniform(u), 0.0, dcrit, n_samples,
                                   "KS distance to U[0,1) <= critical value at alpha = 0.01"));

    const double mean = std::accumulate(u.begin(), u.end(), 0.0) / nd;
    StatReport m;
    m.name = "haar mean" + tag;
    m.estimate = mean;
    m.target = 0.5;
    m.std_error = std::sqrt(1.0 / 12.0 / nd);
    m.n_samples = n_samples;
    m.tolerance_rule = "|mean - 1/2| <= 4*stderr";
    m.evaluate();
    reports.push_back(std::move(m));

    double cov = 0.0, uvar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cov += (trace[i] - tmean) * (u[i] - mean);
      uvar += (u[i] - mean) * (u[i] - mean);
    }
    const double corr = (tvar > 0 && uvar > 0) ? cov / std::sqrt(tvar * uvar) : 0.0;
    reports.push_back(exact_report("extension field-central correlation" + tag, corr, 0.0, corr_tol, n_samples,
                                   "|corr(Re tr g_1(S_0), z_c)| <= 4/sqrt(N)"));

    // Translation invariance: second half shifted by a fixed offset.
    const std::size_t half = n / 2;
    std::vector<double> first(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<double> shifted;
    for (std::size_t i = half; i < n; ++i) {
      const double v = u[i] + 0.3141592653589793;
      shifted.push_back(v - std::floor(v));
    }
    const double neff = static_cast<double>(first.size()) * shifted.size() / (first.size() + shifted.size());
    reports.push_back(exact_report("haar translation invariance" + tag, ks_two_sample(first, shifted), 0.0,
                                   ks_critical_value(0.01, neff), n_samples,
                                   "two-sample KS(z, z + offset mod L) <= critical value at alpha = 0.01"));
  }
  return reports;
}

std::vector<StatReport> central_mixing_test(const LatticeSpec& lattice, const std::vector<double>& times, double dt,
                                            double sigma, std::int64_t n_samples, std::uint64_t seed) {
  require(!times.empty() && std::is_sorted(times.begin(), times.end()) && times.front() > 0.0,
          "central_mixing_test: times must be positive and sorted");
  require(dt > 0.0 && n_samples >= 4, "central_mixing_test: invalid dt or sample count");
  const int dim_z = lattice.dimension();
  const auto lie = std::make_shared<const LieBasis>(2);
  const TorusGrid grid(1, 4);
  const AlgebraField zero_incr(grid, lie->dim());
  const auto n = static_cast<std::size_t>(n_samples);

  std::vector<int> checkpoints;
  for (double t : times) checkpoints.push_back(static_cast<int>(std::lround(t / dt)));
  std::vector<std::vector<double>> first_coord(times.size(), std::vector<double>(n));

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n_samples; ++i) {
    try {
      RngStream stream = substream(seed, static_cast<std::uint64_t>(i));
      ExtendedElement state{initial_state(grid, 2), CentralTorusElement{std::vector<double>(static_cast<std::size_t>(dim_z), 0.0)}};
      int done = 0;
      for (std::size_t j = 0; j < checkpoints.size(); ++j) {
        for (; done < checkpoints[j]; ++done) {
          const std::vector<double> dz = draw_central_increment(dim_z, dt, sigma, stream);
          state = extended_sde_step(state, zero_incr, dz, dt, lattice, *lie);
        }
        first_coord[j][static_cast<std::size_t>(i)] = state.central.coords[0];
      }
    } catch (...) {
#pragma omp critical(hkcg_mixing_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  // Variance of lattice coordinate 0: sigma^2 t (L^{-1} L^{-T})_00.
  const Eigen::MatrixXd inv = lattice.generators().inverse();
  const double coord_scale = inv.row(0).squaredNorm();
  const double dcrit = ks_critical_value(0.01, static_cast<double>(n_samples));

  std::vector<StatReport> reports;
  std::vector<double> distance;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = checkpoints[j] * dt;
    const double var = sigma * sigma * t * coord_scale;
    const double d_wn = ks_statistic(first_coord[j], [](double x, const void* v) {
      return wrapped_normal_cdf(x, *static_cast<const double*>(v));
    }, &var);
    reports.push_back(exact_report("mixing t=" + fmt(t) + " ks vs wrapped normal", d_wn, 0.0, dcrit, n_samples,
                                   "KS distance to wrapped-normal CDF <= critical value at alpha = 0.01"));
    double analytic = 0.0;
    for (int q = 0; q <= 4000; ++q) {
      const double x = q / 4000.0;
      analytic = std::max(analytic, std::abs(wrapped_normal_cdf(x, var) - x));
    }
    const double d_u = ks_statistic_uniform(first_coord[j]);
    distance.push_back(d_u);
    reports.push_back(exact_report("mixing t=" + fmt(t) + " distance to uniform", d_u, analytic, dcrit, n_samples,
                                   "|KS distance to uniform - sup|F_wrapped - x|| <= critical value at alpha = 0.01"));
  }
  double worst_increase = 0.0;
  for (std::size_t j = 1; j < distance.size(); ++j) worst_increase = std::max(worst_increase, distance[j] - distance[j - 1]);
  reports.push_back(exact_report("mixing monotone", worst_increase, 0.0, dcrit, n_samples,
                                 "KS distance to uniform non-increasing in t up to the alpha = 0.01 critical value"));
  return reports;
}

StatReport left_invariance_test(const SdeConfig& cfg, const GroupElement& a, int point, std::int64_t n_samples) {
  cfg.validate();
  require(n_samples >= 2, "left_invariance_test: need at least 2 samples");
  const int n = cfg.spec.lie().n();
  require(a.mat.rows() == n && a.mat.cols() == n, "left_invariance_test: element has the wrong size");
  const FieldState start = initial_state(cfg.spec.grid(), a);
  const RowMajorCMatrix am = a.mat;
  const auto acc = run_batches(n_samples, 4, [&](std::int64_t i, std::vector<double>& s) {
    const FieldState ga = sample_field(cfg, start, substream(cfg.seed, static_cast<std::uint64_t>(i)));
    const FieldState g = sample_field(cfg, substream(cfg.seed, static_cast<std::uint64_t>(n_samples + i)));
    const double va = real_trace(ga.at(point), n);
    const Eigen::Map<const RowMajorCMatrix> gm(g.at(point).data(), n, n);
    const double vb = (am * gm).trace().real();
    s[0] += va;
    s[1] += va * va;
    s[2] += vb;
    s[3] += vb * vb;
  });
  const auto total = column_sums(acc);
  const double nd = static_cast<double>(n_samples);
  const MeanSe ma = iid_mean(total[0], total[1], nd);
  const MeanSe mb = iid_mean(total[2], total[3], nd);
  StatReport r;
  r.name = "left invariance";
  r.estimate = ma.mean - mb.mean;
  r.target = 0.0;
  r.std_error = std::hypot(ma.se, mb.se);
  r.n_samples = n_samples;
  r.tolerance_rule = "|E[Re tr g_1^{(a)}(S)] - E[Re tr a g_1(S)]| <= 4*stderr";
  r.evaluate();
  return r;
}

}  // namespace hkcg
