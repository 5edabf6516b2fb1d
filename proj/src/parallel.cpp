#include "styleaudit/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace styleaudit {

namespace {
std::atomic<int> g_workers{0};
thread_local bool t_inside_parallel = false;
}  // namespace

void set_worker_count(int n) { g_workers.store(n < 0 ? 0 : n); }

int worker_count() {
    const int configured = g_workers.load();
    if (configured > 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = worker_count();
    if (n == 0) return;
    if (workers <= 1 || n == 1 || t_inside_parallel) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto body = [&] {
        t_inside_parallel = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) break;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                break;
            }
        }
        t_inside_parallel = false;
    };

    const std::size_t thread_count =
        std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> threads;
    threads.reserve(thread_count - 1);
    for (std::size_t t = 1; t < thread_count; ++t) threads.emplace_back(body);
    body();
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace styleaudit
