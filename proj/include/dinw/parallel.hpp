#pragma once

#include <cstdint>
#include <functional>

namespace dinw {

// Worker cap shared by all parallel loops. Defaults to the hardware thread
// count, clamped by the DINW_THREADS environment variable when set.
int max_threads();
void set_max_threads(int n);

// Runs fn(i) for i in [begin, end). Work is split into contiguous chunks, one
// per worker; chunk boundaries depend only on (end - begin) and the worker
// count, never on scheduling, so any output written per-index is
// deterministic.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn);

// Single-worker scope for timing-sensitive sections (the bench harness).
class SingleThreadScope {
public:
    SingleThreadScope();
    ~SingleThreadScope();
    SingleThreadScope(const SingleThreadScope&) = delete;
    SingleThreadScope& operator=(const SingleThreadScope&) = delete;

private:
    int saved_;
};

}  // namespace dinw
