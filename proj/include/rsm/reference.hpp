#pragma once

// Serial direct-summation kernels. They are the ground truth the FFT/OpenMP
// kernels are tested against and the baseline in the kernel benchmarks.

#include <vector>

#include "rsm/fft.hpp"
#include "rsm/forward_model.hpp"

namespace rsm::reference {

/// O(m n^2) circular convolution sum.
Signal forward_direct(const Matrix& drm, const Matrix& image);
/// O(m n^2) correlation; adjoint of forward_direct.
Matrix adjoint_direct(const Matrix& drm, const Signal& sig);
/// O(n^2) DFT with the library's sign convention.
std::vector<cplx> dft_naive(std::span<const double> x);
/// sum_i |DFT(d_i)|^2 through dft_naive.
std::vector<double> power_sum_naive(const Matrix& drm);

}  // namespace rsm::reference
