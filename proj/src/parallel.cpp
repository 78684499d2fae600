// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace sparsekern {

namespace {

std::atomic<unsigned> g_limit{0};

unsigned default_limit() {
  if (const char* env = std::getenv("SPARSEKERN_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

void set_thread_limit(unsigned threads) { g_limit.store(threads); }

unsigned thread_limit() {
  const unsigned v = g_limit.load();
  return v == 0 ? default_limit() : v;
}

std::vector<Range> split_range(std::size_t n, std::size_t min_grain) {
  const std::size_t grain = std::max<std::size_t>(1, min_grain);
  const std::size_t parts = std::clamp<std::size_t>(n / grain, 1, thread_limit());
  std::vector<Range> out;
  out.reserve(parts);
  for (std::size_t p = 0; p < parts; ++p) out.push_back({n * p / parts, n * (p + 1) / parts});
  return out;
}

void parallel_tasks(std::size_t count, const std::function<void(std::size_t)>& task) {
  if (count == 1) {
    task(0);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      workers.emplace_back([&, i] {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sparsekern
