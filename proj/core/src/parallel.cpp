#include "fd/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace fd {

namespace {

std::atomic<unsigned> g_test_cap{0};

unsigned env_cap() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("FD_THREADS");
    if (!env || !*env) return hw;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) return hw;
    return std::min<unsigned>(hw, unsigned(v));
}

}  // namespace

unsigned thread_cap() {
    unsigned t = g_test_cap.load(std::memory_order_relaxed);
    if (t > 0) return t;
    return env_cap();
}

void set_thread_cap_for_testing(unsigned cap) {
    g_test_cap.store(cap, std::memory_order_relaxed);
}

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    size_t workers = std::min<size_t>(thread_cap(), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        size_t lo = w * chunk;
        size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace fd
