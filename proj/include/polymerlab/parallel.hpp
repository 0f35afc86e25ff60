#ifndef POLYMERLAB_PARALLEL_HPP
#define POLYMERLAB_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace polymerlab {

// Runs body(i) for i in [0, n) on `workers` threads.  Work items are claimed
// from a shared counter; results must be written to slots indexed by i so the
// outcome is independent of scheduling.  Reductions over the slots then
// happen in index order on the caller's thread.
template <typename Body>
void parallel_for(int64_t n, int workers, Body&& body) {
    if (workers <= 1 || n <= 1) {
        for (int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto run = [&] {
        while (true) {
            int64_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace polymerlab

#endif
