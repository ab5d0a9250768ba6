#include "arwmass/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace arwmass {

namespace {

std::atomic<int> g_override{0};
thread_local bool t_inside = false;  // nested regions run serially

}  // namespace

int worker_count() {
  if (const int w = g_override.load(); w > 0) return w;
  if (const char* env = std::getenv("ARWMASS_THREADS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_worker_count(int workers) { g_override.store(workers > 0 ? workers : 0); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1 || t_inside) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto run = [&](std::size_t lo, std::size_t hi) {
    const bool outer = t_inside;
    t_inside = true;
    struct Reset {
      bool v;
      ~Reset() { t_inside = v; }
    } reset{outer};
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = w * block;
    const std::size_t hi = std::min(n, lo + block);
    if (lo < hi) pool.emplace_back(run, lo, hi);
  }
  run(0, std::min(n, block));
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace arwmass
