#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace rsm {

using cplx = std::complex<double>;

/// Length-n complex DFT.
///
/// Forward is unnormalized, X[k] = sum_j x[j] exp(-2 pi i jk/n); inverse
/// carries the 1/n factor so inverse(forward(x)) == x. Plans come from a
/// process-wide cache guarded by a mutex; execution is thread-safe.
class Dft {
public:
    explicit Dft(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<const cplx> in, std::span<cplx> out) const;
    /// Real input, full length-n spectrum.
    void forward(std::span<const double> in, std::span<cplx> out) const;
    /// Includes the 1/n normalization.
    void inverse(std::span<const cplx> in, std::span<cplx> out) const;

private:
    std::size_t n_;
    void* fwd_;
    void* bwd_;
};

}  // namespace rsm
