#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "pdpha/common.hpp"

namespace pdpha {

// Static contiguous partition of [0, count) over `jobs` workers. fn is called
// as fn(worker, begin, end). jobs == 1 runs inline, which is the
// bit-reproducible mode every CLI command guarantees.
inline void parallel_chunks(size_t count, int jobs,
                            const std::function<void(size_t worker, size_t begin, size_t end)>& fn) {
    require(jobs >= 1, "jobs must be >= 1");
    const size_t workers = std::min<size_t>(static_cast<size_t>(jobs), count ? count : 1);
    if (workers <= 1) {
        fn(0, 0, count);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const size_t chunk = (count + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        const size_t begin = w * chunk;
        const size_t end = std::min(count, begin + chunk);
        threads.emplace_back([&, w, begin, end] {
            try {
                if (begin < end) fn(w, begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : threads) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace pdpha
