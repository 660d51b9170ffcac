#pragma once

namespace audiofp {

// Kernels that have an OpenMP path keep a serial reference path with
// bit-identical output. Tests compare the two; the benchmark times them.
enum class Execution { Serial, Parallel };

}  // namespace audiofp
