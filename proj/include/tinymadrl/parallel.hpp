#ifndef TINYMADRL_PARALLEL_HPP_
#define TINYMADRL_PARALLEL_HPP_

#include <cstddef>
#include <exception>
#include <mutex>

namespace tinymadrl {

// Selects between the OpenMP kernel and the serial reference loop. Both
// paths must produce bit-identical results; tests compare them directly.
enum class Execution { kSerial, kParallel };

// Runs fn(i) for i in [0, n). Iterations must be independent. The first
// exception thrown by any iteration is rethrown on the calling thread.
template <typename Fn>
void ParallelFor(std::size_t n, Execution exec, Fn&& fn) {
  if (exec == Execution::kSerial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace tinymadrl

#endif  // TINYMADRL_PARALLEL_HPP_
