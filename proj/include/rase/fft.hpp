// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

namespace rase {

/// Unnormalised forward DFT, X_k = sum_n x_n exp(-2 pi i k n / N).
std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x);

/// Unnormalised inverse, x_n = sum_k X_k exp(+2 pi i k n / N).
std::vector<std::complex<double>> idft(const std::vector<std::complex<double>>& x);

}  // namespace rase
