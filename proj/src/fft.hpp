#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace hnoise::detail {

/// X_l = sum_j x_j exp(-2 pi i l j / n), l = 0..n/2.
std::vector<std::complex<double>> real_forward(std::span<const double> x);

/// x_j = sum_{l=0}^{n-1} X_l exp(+2 pi i l j / n) for Hermitian X given by its
/// first n/2+1 entries. Unnormalized.
std::vector<double> hermitian_inverse(std::span<const std::complex<double>> half, std::size_t n);

}  // namespace hnoise::detail
