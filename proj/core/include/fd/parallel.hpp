#ifndef FD_PARALLEL_HPP
#define FD_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace fd {

// Number of worker threads to use. Defaults to hardware concurrency, capped
// by the FD_THREADS environment variable when set (minimum 1).
unsigned thread_cap();

// Test hook: overrides thread_cap() for the current process. 0 restores the
// environment-derived value.
void set_thread_cap_for_testing(unsigned cap);

// Runs fn(begin, end) over disjoint chunks of [0, n). Callers must only
// write to disjoint locations; results are then independent of the thread
// count, keeping outputs byte-stable under any FD_THREADS setting.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

}  // namespace fd

#endif
