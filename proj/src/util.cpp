#include "conststyle/util.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace conststyle {

int worker_thread_count() {
  static const int count = [] {
    const char* env = std::getenv("CSTYLE_THREADS");
    if (env == nullptr) return 1;
    const int parsed = std::atoi(env);
    return parsed < 1 ? 1 : parsed;
  }();
  return count;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int workers = worker_thread_count();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  const std::size_t chunk = (n + used - 1) / used;
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (std::size_t w = 0; w < used; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace conststyle
