#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace ouk {

// Deterministic data-parallel helpers. Work is cut into fixed-size chunks and
// partial results are combined in chunk order, so the result is bitwise
// identical for any worker count.

int worker_count();
void set_worker_count(int n);

inline constexpr std::int64_t kDefaultChunk = 8192;

/// body(chunk_index, begin, end) fills out[chunk_index]; chunks are combined by the caller.
template <class Body>
void run_chunks(std::int64_t n, std::int64_t chunk, Body&& body) {
  if (n <= 0) return;
  const std::int64_t num_chunks = (n + chunk - 1) / chunk;
  const int workers = std::min<std::int64_t>(worker_count(), num_chunks);
  if (workers <= 1) {
    for (std::int64_t c = 0; c < num_chunks; ++c)
      body(c, c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= num_chunks) break;
      body(c, c * chunk, std::min(n, (c + 1) * chunk));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

/// Deterministic sum of term(i) over i in [0,n): per-chunk partials, serial combine.
template <class Term>
double chunked_sum(std::int64_t n, Term&& term, std::int64_t chunk = kDefaultChunk) {
  if (n <= 0) return 0.0;
  const std::int64_t num_chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(num_chunks, 0.0);
  run_chunks(n, chunk, [&](std::int64_t c, std::int64_t b, std::int64_t e) {
    double s = 0.0;
    for (std::int64_t i = b; i < e; ++i) s += term(i);
    partial[c] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

/// Deterministic mean and standard error of term(i) over i in [0,n).
struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

template <class Term>
MeanStderr chunked_mean(std::int64_t n, Term&& term, std::int64_t chunk = kDefaultChunk) {
  const std::int64_t num_chunks = (n + chunk - 1) / chunk;
  std::vector<double> psum(num_chunks, 0.0), psq(num_chunks, 0.0);
  run_chunks(n, chunk, [&](std::int64_t c, std::int64_t b, std::int64_t e) {
    double s = 0.0, s2 = 0.0;
    for (std::int64_t i = b; i < e; ++i) {
      const double v = term(i);
      s += v;
      s2 += v * v;
    }
    psum[c] = s;
    psq[c] = s2;
  });
  double s = 0.0, s2 = 0.0;
  for (std::int64_t c = 0; c < num_chunks; ++c) {
    s += psum[c];
    s2 += psq[c];
  }
  MeanStderr r;
  r.mean = s / static_cast<double>(n);
  const double var = std::max(0.0, s2 / static_cast<double>(n) - r.mean * r.mean);
  r.stderr_ = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
  return r;
}

}  // namespace ouk
