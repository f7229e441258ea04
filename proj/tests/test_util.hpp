#pragma once

#include <memory>

#include "hkcg/brownian.hpp"
#include "hkcg/sampler.hpp"

namespace hkcg::testing {

inline CovarianceSpec make_spec(int d, int p_axis, int max_mode, int k = 2, int n = 2) {
  auto basis = std::make_shared<const SpectralBasis>(TorusGrid(d, p_axis), max_mode);
  auto lie = std::make_shared<const LieBasis>(n);
  return k == 0 ? CovarianceSpec::white_noise_control(basis, lie) : CovarianceSpec(k, basis, lie);
}

inline SdeConfig make_config(int d, int p_axis, int max_mode, int n_steps, double t_end, std::uint64_t seed,
                             int k = 2, int n = 2) {
  return SdeConfig{make_spec(d, p_axis, max_mode, k, n), n_steps, t_end, seed};
}

}  // namespace hkcg::testing
