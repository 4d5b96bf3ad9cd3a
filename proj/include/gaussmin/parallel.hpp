#pragma once

// Deterministic chunked parallelism. Work is cut into fixed-size chunks whose
// boundaries depend only on the total count; results are stored per chunk and
// reduced by the caller in chunk order, so output never depends on the
// number of worker threads.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gaussmin {

inline constexpr std::size_t kChunkSize = std::size_t{1} << 16;

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> threads{0};
    return threads;
}
}  // namespace detail

// 0 selects std::thread::hardware_concurrency().
inline void set_thread_count(unsigned threads) { detail::thread_setting().store(threads); }

inline unsigned thread_count() {
    const unsigned t = detail::thread_setting().load();
    if (t != 0) return t;
    return std::max(1u, std::thread::hardware_concurrency());
}

inline std::size_t chunk_count(std::size_t total, std::size_t chunk = kChunkSize) {
    return (total + chunk - 1) / chunk;
}

// Calls fn(chunk_index, begin, end) for every chunk of [0, total).
template <class Fn>
void for_each_chunk(std::size_t total, Fn&& fn, std::size_t chunk = kChunkSize) {
    const std::size_t chunks = chunk_count(total, chunk);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), chunks));
    auto run = [&](std::size_t c) { fn(c, c * chunk, std::min(total, (c + 1) * chunk)); };
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < chunks; c = next++) {
                try {
                    run(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// Index-parallel loop over [0, count) with one task per index.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    for_each_chunk(count, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
    }, 1);
}

}  // namespace gaussmin
