#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace conecalc {

/// Thread budget: min(hardware, CONECALC_THREADS when set). A value of 1
/// disables worker threads.
inline int thread_budget()
{
    static const int budget = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw <= 0) hw = 1;
        if (const char* env = std::getenv("CONECALC_THREADS")) {
            try {
                const int cap = std::stoi(env);
                if (cap >= 1) hw = std::min(hw, cap);
            } catch (...) {
            }
        }
        return hw;
    }();
    return budget;
}

/// Index-parallel loop with deterministic work assignment (contiguous
/// blocks). The body must only write to its own index's slots.
template <typename Fn>
void parallel_for(int n, Fn&& body)
{
    const int threads = std::min(thread_budget(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace conecalc
