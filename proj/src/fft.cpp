// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include "rase/fft.hpp"

#include <cstring>
#include <map>
#include <mutex>
#include <utility>

#include <fftw3.h>

namespace rase {

namespace {

// Plans are created once per (size, direction) under a lock; executing a
// plan on fresh fftw_malloc'd arrays is thread safe.
struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex);
    auto key = std::make_pair(n, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [k, p] : plans) fftw_destroy_plan(p);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

std::vector<std::complex<double>> run(const std::vector<std::complex<double>>& x,
                                      int sign) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  fftw_plan plan = cache().get(n, sign);
  auto* in = fftw_alloc_complex(n);
  auto* out = fftw_alloc_complex(n);
  std::memcpy(in, x.data(), n * sizeof(fftw_complex));
  fftw_execute_dft(plan, in, out);
  std::vector<std::complex<double>> y(n);
  std::memcpy(static_cast<void*>(y.data()), out, n * sizeof(fftw_complex));
  fftw_free(in);
  fftw_free(out);
  return y;
}

}  // namespace

std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
  return run(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> idft(const std::vector<std::complex<double>>& x) {
  return run(x, FFTW_BACKWARD);
}

}  // namespace rase
