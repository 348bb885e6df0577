#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace parisi {

/// Run f(i) for i in [0, n) on up to `threads` workers.
///
/// Work is split into contiguous blocks, so results written per index do not
/// depend on the thread count. The first exception thrown by any task is
/// rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Pairwise (cascade) sum; the association order depends only on the input length.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

}  // namespace parisi
