#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace todalab {

/// Evaluates f(0..count-1) on up to `threads` workers; results keep index order,
/// so output does not depend on scheduling. Worker w handles indices w, w+T, ...
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, std::size_t threads, F&& f) {
  std::vector<R> out(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  const std::size_t T = std::min(threads, count);
  std::vector<std::exception_ptr> errors(T);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < T; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += T) out[i] = f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace todalab
