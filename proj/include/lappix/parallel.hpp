#pragma once

namespace lappix {

// Global switch between the serial reference path and the OpenMP path.
// Both paths must produce bit-identical results; tests compare them.
void set_parallel(bool on);
bool parallel_enabled();

template <class F>
void parallel_for(int n, F&& f) {
#ifdef _OPENMP
    if (parallel_enabled() && n > 1) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
#endif
    for (int i = 0; i < n; ++i) f(i);
}

}  // namespace lappix
