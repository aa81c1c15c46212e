#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sausagelab {

// Worker count: explicit request > SAUSAGELAB_WORKERS env > hardware.
inline int resolve_workers(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SAUSAGELAB_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(begin, end) over fixed-size chunks of [0, n). The chunk grid depends
// only on n, never on the worker count, so per-chunk results indexed by chunk
// id reduce to bit-identical totals under any schedule.
inline void for_each_chunk(std::int64_t n, int workers,
                           const std::function<void(std::int64_t chunk_index, std::int64_t begin,
                                                    std::int64_t end)>& fn,
                           std::int64_t chunk_size = 256) {
    if (n <= 0) return;
    const std::int64_t n_chunks = (n + chunk_size - 1) / chunk_size;
    workers = resolve_workers(workers);
    if (workers <= 1 || n_chunks == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks || failed.load()) return;
            try {
                fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = static_cast<int>(std::min<std::int64_t>(workers, n_chunks));
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Deterministic map-reduce: per-chunk accumulators merged in chunk order.
template <class Acc, class PerChunk, class Merge>
Acc chunked_reduce(std::int64_t n, int workers, Acc init, PerChunk per_chunk, Merge merge,
                   std::int64_t chunk_size = 256) {
    if (n <= 0) return init;
    const std::int64_t n_chunks = (n + chunk_size - 1) / chunk_size;
    std::vector<Acc> partial(static_cast<std::size_t>(n_chunks), init);
    for_each_chunk(
        n, workers,
        [&](std::int64_t c, std::int64_t b, std::int64_t e) { partial[static_cast<std::size_t>(c)] = per_chunk(b, e); },
        chunk_size);
    Acc total = init;
    for (auto& p : partial) total = merge(total, p);
    return total;
}

}  // namespace sausagelab
