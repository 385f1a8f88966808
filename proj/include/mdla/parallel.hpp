#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mdla {

// Worker count used by all replica/sample loops. Results never depend on it:
// work is split into fixed chunks, each with its own RNG stream, merged in order.
inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> n{1};
    return n;
}
inline void set_threads(unsigned n) { thread_setting() = n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n; }
inline unsigned threads() { return thread_setting(); }

// runs fn(i) for i in [0, n); exceptions from workers are rethrown (first one wins)
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned nt = std::min<std::size_t>(threads(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nt; ++w)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next++;
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(m);
                    if (!err) err = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// fixed chunking of n samples so that chunk boundaries (and streams) do not depend on thread count
struct Chunks {
    std::size_t n, size;
    explicit Chunks(std::size_t total, std::size_t chunk = 4096) : n((total + chunk - 1) / chunk), size(chunk), total_(total) {}
    std::size_t begin(std::size_t c) const { return c * size; }
    std::size_t end(std::size_t c) const { return std::min(total_, (c + 1) * size); }

private:
    std::size_t total_;
};

}  // namespace mdla
