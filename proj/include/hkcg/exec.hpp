#pragma once

namespace hkcg {

// Kernels come in a serial reference form and an OpenMP form.  Both produce
// bit-identical results: every output entry is accumulated in the same order.
enum class Exec { serial, parallel };

}  // namespace hkcg
