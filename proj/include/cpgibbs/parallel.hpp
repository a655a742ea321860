#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace cpgibbs {

/// Serial is the reference path; Parallel fans out with OpenMP.
enum class Exec { Serial, Parallel };

/// Runs body(i) for i in [0, count). Results must be written to slot i so the
/// outcome does not depend on the thread count. The first exception is rethrown.
template <class Body>
void fan_out(std::size_t count, Exec exec, Body&& body) {
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex guard;
    const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace cpgibbs
