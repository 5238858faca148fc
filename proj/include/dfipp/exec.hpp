#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#include "dfipp/rng.hpp"

namespace dfipp {

enum class Exec { Serial, Parallel };

// Runs fn(derive_seed(seed, i)) for every trial index. Results are stored
// by index, so the output does not depend on the worker count.
template <class T, class F>
std::vector<T> run_trials(size_t trials, uint64_t seed, F&& fn, Exec exec = Exec::Parallel) {
  std::vector<T> out(trials);
  if (exec == Exec::Serial) {
    for (size_t i = 0; i < trials; ++i) out[i] = fn(derive_seed(seed, i));
    return out;
  }
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(trials); ++i) {
    try {
      out[static_cast<size_t>(i)] = fn(derive_seed(seed, static_cast<uint64_t>(i)));
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace dfipp
