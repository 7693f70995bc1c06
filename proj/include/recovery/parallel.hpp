#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace recovery {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Index-to-thread
/// assignment is static; callers write results by index so output does not
/// depend on the worker count. The first exception thrown is rethrown.
/// fn may also take (i, worker) to use per-worker scratch space.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const auto call = [&fn](std::size_t i, std::size_t w) {
        if constexpr (std::is_invocable_v<Fn&, std::size_t, std::size_t>)
            fn(i, w);
        else
            fn(i);
    };
    const auto threads = std::min<std::size_t>(n, workers > 1 ? static_cast<std::size_t>(workers) : 1);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) call(i, 0);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += threads) call(i, w);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace recovery
