#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace nmfg {

/// Runs fn(begin, end) over contiguous chunks of [0, n) on `workers` threads.
/// Chunk boundaries depend only on (n, workers), and callers write disjoint
/// output ranges, so results are identical for any worker count; workers <= 1
/// runs inline on the calling thread.
template <typename Fn>
void parallel_for_chunks(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> threads;
    threads.reserve(w - 1);
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t t = 1; t < w; ++t) {
        const std::size_t b = std::min(n, t * chunk);
        const std::size_t e = std::min(n, (t + 1) * chunk);
        if (b < e) threads.emplace_back([&fn, b, e] { fn(b, e); });
    }
    fn(std::size_t{0}, std::min(n, chunk));
    for (auto& th : threads) th.join();
}

}  // namespace nmfg
