#pragma once
// Deterministic fork-join helper. Work is split into fixed contiguous chunks
// by index, never stolen, so the assignment of items to workers is a pure
// function of (n, workers) and output cannot depend on scheduling.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rgbm {

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& body) {
    workers = std::max(1u, workers);
    if (workers == 1 || n < 2) {
        body(std::size_t{0}, n);
        return;
    }
    std::size_t chunks = std::min<std::size_t>(workers, n);
    std::size_t per = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(chunks);
    for (std::size_t c = 1; c < chunks; ++c) {
        std::size_t lo = c * per, hi = std::min(n, lo + per);
        pool.emplace_back([&body, &errs, c, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                errs[c] = std::current_exception();
            }
        });
    }
    try {
        body(std::size_t{0}, std::min(n, per));
    } catch (...) {
        errs[0] = std::current_exception();
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

} // namespace rgbm
