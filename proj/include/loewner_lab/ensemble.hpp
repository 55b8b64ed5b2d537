#pragma once

#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <omp.h>

namespace ll {

// Worker count from LOEWNER_LAB_WORKERS, falling back to `fallback`.
inline int workers_from_env(int fallback = 1) {
    const char* v = std::getenv("LOEWNER_LAB_WORKERS");
    if (!v || !*v) return fallback;
    int n = std::atoi(v);
    return n > 0 ? n : fallback;
}

// Runs job(i) for i in [0, n) on a pool of `workers` threads and returns the
// results by index.  Jobs must depend on i only; the first failing job (by
// index) has its exception rethrown.
template <class R, class F>
std::vector<R> run_ensemble(std::size_t n, int workers, F&& job) {
    std::vector<R> out(n);
    std::vector<std::exception_ptr> err(n);
    const long long N = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers > 0 ? workers : 1)
    for (long long i = 0; i < N; ++i) {
        try {
            out[i] = job(static_cast<std::size_t>(i));
        } catch (...) {
            err[i] = std::current_exception();
        }
    }
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    return out;
}

// Serial reference for run_ensemble.
template <class R, class F>
std::vector<R> run_ensemble_serial(std::size_t n, F&& job) {
    std::vector<R> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(job(i));
    return out;
}

}  // namespace ll
