#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace oodzoo {

/// 0 means "all hardware threads".
inline std::size_t resolve_threads(std::size_t requested) noexcept {
  if (requested != 0) return requested;
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Splits [0, n) into fixed blocks of `block` items and calls
/// fn(block_index, begin, end) for each. Block boundaries depend only on n
/// and block, never on the thread count, so per-block partial results reduce
/// to identical totals for any `threads`. The first exception is rethrown.
template <typename Fn>
void for_each_block(std::size_t n, std::size_t block, std::size_t threads, Fn&& fn) {
  if (n == 0) return;
  block = std::max<std::size_t>(block, 1);
  const std::size_t blocks = (n + block - 1) / block;
  const std::size_t workers = std::min(resolve_threads(threads), blocks);
  auto run = [&](std::size_t b) { fn(b, b * block, std::min(n, (b + 1) * block)); };
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run(b);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < blocks; b += workers) {
        try {
          run(b);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::size_t block_count(std::size_t n, std::size_t block) noexcept {
  return block == 0 ? 0 : (n + block - 1) / block;
}

}  // namespace oodzoo
