#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace esle {

inline unsigned default_thread_count() {
    if (const char* env = std::getenv("ESLE_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

// Chunked parallel loop over [0, n). Each index writes only its own output
// slot, so results do not depend on scheduling. Exceptions are rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned n_threads = 0) {
    if (n == 0) return;
    if (n_threads == 0) n_threads = default_thread_count();
    const std::size_t chunk = 64;
    if (n_threads <= 1 || n <= chunk) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            std::size_t begin = next.fetch_add(chunk);
            if (begin >= n || failed.load()) return;
            std::size_t end = std::min(begin + chunk, n);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(n_threads, (n + chunk - 1) / chunk));
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

// Sharded parallel reduction with a deterministic merge order. Shards are
// computed concurrently but merged strictly by shard index, so the reduced
// result is identical for any thread count (and bitwise reproducible when
// the merge is plain accumulation).
template <class Partial, class Compute, class Merge>
void sharded_reduce(std::size_t n_items, std::size_t shard_size, Compute&& compute,
                    Merge&& merge_in_order, unsigned n_threads = 0) {
    if (n_items == 0) return;
    if (shard_size == 0) shard_size = 1;
    if (n_threads == 0) n_threads = default_thread_count();
    const std::size_t n_shards = (n_items + shard_size - 1) / shard_size;

    if (n_threads <= 1 || n_shards <= 1) {
        for (std::size_t s = 0; s < n_shards; ++s) {
            std::size_t begin = s * shard_size;
            std::size_t end = std::min(begin + shard_size, n_items);
            merge_in_order(s, compute(s, begin, end));
        }
        return;
    }

    std::mutex mtx;
    std::condition_variable cv;
    std::map<std::size_t, Partial> pending;
    std::size_t next_merge = 0;
    std::atomic<std::size_t> next_shard{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto worker = [&] {
        for (;;) {
            std::size_t s = next_shard.fetch_add(1);
            if (s >= n_shards || failed.load()) return;
            std::size_t begin = s * shard_size;
            std::size_t end = std::min(begin + shard_size, n_items);
            try {
                Partial p = compute(s, begin, end);
                std::unique_lock<std::mutex> lock(mtx);
                // bound the backlog so memory stays proportional to threads
                cv.wait(lock, [&] { return failed.load() || s <= next_merge + 2 * n_threads; });
                if (failed.load()) return;
                pending.emplace(s, std::move(p));
                while (!pending.empty() && pending.begin()->first == next_merge) {
                    auto node = pending.extract(pending.begin());
                    merge_in_order(node.key(), std::move(node.mapped()));
                    ++next_merge;
                }
                cv.notify_all();
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                cv.notify_all();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_shards));
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace esle
