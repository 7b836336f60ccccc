#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace pirsense {

/// Run body(i) for i in [0, count) across up to `threads` workers. Each index
/// is processed exactly once and results must be written by index, so the
/// outcome is identical for every thread count.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (int i = t; i < count; i += threads) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& worker : pool) worker.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace pirsense
