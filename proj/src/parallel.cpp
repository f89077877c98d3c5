#include "dinw/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace dinw {

namespace {

int env_thread_cap() {
    const char* env = std::getenv("DINW_THREADS");
    if (env == nullptr) return 0;
    int v = std::atoi(env);
    return v > 0 ? v : 0;
}

int default_threads() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    int cap = env_thread_cap();
    if (cap > 0) hw = std::min(hw, cap);
    return hw;
}

std::atomic<int> g_max_threads{0};  // 0 = not initialized yet

}  // namespace

int max_threads() {
    int v = g_max_threads.load(std::memory_order_relaxed);
    if (v == 0) {
        v = default_threads();
        g_max_threads.store(v, std::memory_order_relaxed);
    }
    return v;
}

void set_max_threads(int n) {
    g_max_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn) {
    const std::int64_t count = end - begin;
    if (count <= 0) return;

    const int workers = static_cast<int>(
        std::min<std::int64_t>(max_threads(), count));
    if (workers <= 1) {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
        return;
    }

    const std::int64_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    for (int t = 0; t < workers; ++t) {
        const std::int64_t lo = begin + t * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::int64_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(error);
}

SingleThreadScope::SingleThreadScope() : saved_(max_threads()) {
    set_max_threads(1);
}

SingleThreadScope::~SingleThreadScope() {
    set_max_threads(saved_);
}

}  // namespace dinw
