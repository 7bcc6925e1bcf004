#include "maxlab/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace maxlab {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MAXLAB_WORKERS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

void parallel_for(std::int64_t n, int workers,
                  const std::function<void(std::int64_t, std::int64_t)>& fn) {
  workers = std::max(1, workers);
  if (n <= 0) return;
  if (workers == 1 || n < 2 * workers) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t b = std::min<std::int64_t>(n, w * chunk);
    std::int64_t e = std::min<std::int64_t>(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

namespace {
double pairwise_rec(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_rec(v, half) + pairwise_rec(v + half, n - half);
}
}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_rec(v.data(), v.size()); }

}  // namespace maxlab
