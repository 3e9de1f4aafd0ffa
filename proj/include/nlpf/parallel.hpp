#ifndef NLPF_PARALLEL_HPP
#define NLPF_PARALLEL_HPP

#include <cstdlib>
#include <thread>
#include <vector>

namespace nlpf {

/// Worker count: NLPF_THREADS if set and positive, otherwise hardware
/// parallelism.
inline unsigned worker_count() {
    if (const char* env = std::getenv("NLPF_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Run fn(i) for i in [0, n) over contiguous per-thread ranges. Each index
/// is visited exactly once; fn must only write state owned by index i.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    unsigned workers = worker_count();
    if (workers <= 1 || n < 2 * workers) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
        std::size_t begin = t * chunk;
        std::size_t end = begin + chunk < n ? begin + chunk : n;
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace nlpf

#endif
