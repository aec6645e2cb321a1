#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lvlmc {

/// Runs body(i) for i in [0, n) across `threads` workers. Work item i always
/// computes the same value no matter the thread count; the caller writes
/// results into slot i of a preallocated buffer. The first exception wins
/// and is rethrown on the caller thread.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (n <= 0) return;
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    std::atomic<int> cursor{0};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            while (true) {
                const int i = cursor.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& worker : pool) worker.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace lvlmc
