#pragma once

namespace prmix {

/// Selects between the OpenMP kernels and the serial reference loops.
/// Both paths produce bit-identical results; the serial one is kept for
/// testing and benchmarking.
enum class Execution { Serial, Parallel };

}  // namespace prmix
