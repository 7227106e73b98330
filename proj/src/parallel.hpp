#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace resdim::detail {

// run fn(w) for w in [0, count) on up to `threads` workers; exceptions are
// captured and rethrown on the caller thread
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads <= 1) {
        for (int w = 0; w < count; ++w) fn(w);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                while (true) {
                    int w = next.fetch_add(1);
                    if (w >= count) break;
                    fn(w);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace resdim::detail
