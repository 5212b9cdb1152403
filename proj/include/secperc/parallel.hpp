#pragma once

// Trial execution. Trial t always draws from Stream(seed, t), and results are
// reduced by trial index, so output never depends on the worker count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "secperc/rng.hpp"

namespace secperc::parallel {

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(trial, stream) for every trial in [0, trials) and stores the
/// results in trial order.
template <class T, class Body>
std::vector<T> map_trials(std::uint64_t trials, unsigned workers, std::uint64_t seed, Body body) {
  std::vector<T> out(trials);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(trials, 1))));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    try {
      for (;;) {
        const std::uint64_t t = next.fetch_add(1, std::memory_order_relaxed);
        if (t >= trials) return;
        rng::Stream stream(seed, t);
        out[t] = body(t, stream);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(trials);
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Number of trials for which body(trial, stream) returned true.
template <class Body>
std::uint64_t count_successes(std::uint64_t trials, unsigned workers, std::uint64_t seed,
                              Body body) {
  const auto hits = map_trials<char>(trials, workers, seed,
                                     [&](std::uint64_t t, rng::Stream& s) -> char {
                                       return body(t, s) ? 1 : 0;
                                     });
  std::uint64_t n = 0;
  for (char h : hits) n += static_cast<std::uint64_t>(h);
  return n;
}

}  // namespace secperc::parallel
