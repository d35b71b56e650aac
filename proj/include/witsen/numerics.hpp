#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace witsen {

struct Minimum1D {
  double x = 0.0;
  double value = 0.0;
};

struct MinimumND {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for a minimum of f on [lo, hi]; stops when the
/// bracket is narrower than rel_tol * (|x| + abs_tol).
Minimum1D golden_section(const std::function<double(double)>& f, double lo, double hi,
                         double rel_tol = 1e-10, double abs_tol = 1e-12);

struct NelderMeadOptions {
  double initial_step = 0.25;
  double x_tol = 1e-9;
  double f_tol = 1e-13;
  int max_evaluations = 2000;
};

/// Downhill simplex minimization starting from x0.
MinimumND nelder_mead(const std::function<double(std::span<const double>)>& f,
                      std::vector<double> x0, const NelderMeadOptions& options = {});

/// n points evenly spaced in log between lo and hi (both included).
std::vector<double> log_grid(double lo, double hi, int n);

/// n points evenly spaced between lo and hi (both included).
std::vector<double> linear_grid(double lo, double hi, int n);

/// Minimize f over a 1-D grid, then refine around the best `n_starts` local
/// grid minima by golden section. The returned point is the best found.
Minimum1D multistart_minimize(const std::function<double(double)>& f, std::span<const double> grid,
                              int n_starts = 3, double rel_tol = 1e-10);

/// Threads used when a caller passes 0.
unsigned default_thread_count();

/// Runs body(i) for i in [0, n). Work is split by index, so any reduction the
/// caller performs over per-index results is independent of thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = 0) {
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < n; i += threads) body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace witsen
