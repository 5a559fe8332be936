#pragma once

#include <cstdlib>
#include <omp.h>
#include <string>

namespace gbsk {

/// Caps the number of worker threads used by parallel stages. 0 restores the default.
inline void set_thread_count(int threads) {
    if (threads <= 0) threads = omp_get_num_procs();
    omp_set_num_threads(threads);
}

inline int thread_count() { return omp_get_max_threads(); }

/// Reads GBSK_THREADS; returns 0 when unset or malformed.
inline int thread_count_from_env() {
    const char* value = std::getenv("GBSK_THREADS");
    if (value == nullptr) return 0;
    try {
        return std::stoi(value);
    } catch (...) {
        return 0;
    }
}

} // namespace gbsk
