#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace pgl {

// Fixed-grid work splitting: [begin, end) is cut into chunks of size
// `chunk` regardless of the thread count, workers claim chunk indices from
// an atomic counter, and each chunk writes only state indexed by its own
// chunk id. Results are therefore identical for any `threads` value; the
// caller merges per-chunk state in chunk order afterwards.
inline void for_chunks(std::uint64_t begin, std::uint64_t end, std::uint64_t chunk, int threads,
                       const std::function<void(std::size_t, std::uint64_t, std::uint64_t)>& body) {
    if (end <= begin) return;
    if (chunk == 0) chunk = 1;
    const std::uint64_t span = end - begin;
    const std::size_t n_chunks = static_cast<std::size_t>((span + chunk - 1) / chunk);

    auto run_chunk = [&](std::size_t ci) {
        const std::uint64_t lo = begin + static_cast<std::uint64_t>(ci) * chunk;
        const std::uint64_t hi = lo + chunk < end ? lo + chunk : end;
        body(ci, lo, hi);
    };

    if (threads <= 1 || n_chunks <= 1) {
        for (std::size_t ci = 0; ci < n_chunks; ++ci) run_chunk(ci);
        return;
    }

    const std::size_t n_workers =
        static_cast<std::size_t>(threads) < n_chunks ? static_cast<std::size_t>(threads) : n_chunks;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;  // written once, by the CAS winner below

    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t ci = next.fetch_add(1);
                if (ci >= n_chunks || failed.load()) return;
                try {
                    run_chunk(ci);
                } catch (...) {
                    bool expected = false;
                    if (failed.compare_exchange_strong(expected, true)) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load() && first_error) std::rethrow_exception(first_error);
}

// number of chunks the grid above produces, for sizing per-chunk buffers
inline std::size_t chunk_count(std::uint64_t begin, std::uint64_t end, std::uint64_t chunk) {
    if (end <= begin) return 0;
    if (chunk == 0) chunk = 1;
    return static_cast<std::size_t>((end - begin + chunk - 1) / chunk);
}

}  // namespace pgl
