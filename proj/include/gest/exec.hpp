#pragma once

namespace gest {

/// Selects between the OpenMP kernel and its serial reference. Both produce identical results.
enum class Exec { serial, parallel };

/// Threads the parallel kernels will use.
int parallel_threads();

}  // namespace gest
