#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace mridvr {

inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Splits [0, count) into contiguous chunks, one per worker, and calls
// fn(begin, end, worker_index). Runs inline when a single worker is requested.
template <typename Fn>
void parallel_chunks(std::size_t count, unsigned workers, Fn&& fn) {
    workers = static_cast<unsigned>(std::clamp<std::size_t>(resolve_workers(workers), 1, std::max<std::size_t>(count, 1)));
    if (workers == 1) {
        fn(std::size_t{0}, count, 0u);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(count, w * chunk);
        const std::size_t end = std::min(count, begin + chunk);
        pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
    }
}

} // namespace mridvr
