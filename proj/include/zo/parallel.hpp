#pragma once

#include <cstdint>
#include <functional>

namespace zo {

// True when the library was compiled with OpenMP.
bool openmp_enabled();

int max_threads();

// Caps the worker count (0 = library default). Affects all parallel kernels.
void set_max_threads(int n);

// Runs f(i) for i in [0, count). Parallel iff allow_parallel and OpenMP is
// available; every kernel built on this must write results into per-index
// slots and reduce in index order, so the outcome is identical either way.
void parallel_for(std::uint64_t count, bool allow_parallel,
                  const std::function<void(std::uint64_t)>& f);

}  // namespace zo
