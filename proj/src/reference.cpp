#include "rsm/reference.hpp"

#include <cmath>
#include <numbers>

#include "rsm/error.hpp"

namespace rsm::reference {

Signal forward_direct(const Matrix& drm, const Matrix& image) {
    if (!drm.same_shape(image)) throw DimensionError("forward_direct: shape mismatch");
    const std::size_t m = drm.rows();
    const std::size_t n = drm.cols();
    Signal s(n);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = 0; k < n; ++k) acc += drm(i, k) * image(i, (j + n - k) % n);
        }
        s[j] = acc;
    }
    return s;
}

Matrix adjoint_direct(const Matrix& drm, const Signal& sig) {
    if (sig.size() != drm.cols()) throw DimensionError("adjoint_direct: length mismatch");
    const std::size_t m = drm.rows();
    const std::size_t n = drm.cols();
    Matrix g(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += drm(i, (j + n - k) % n) * sig[j];
            g(i, k) = acc;
        }
    }
    return g;
}

std::vector<cplx> dft_naive(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            // reduce jk mod n first so the angle stays small
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
            acc += x[j] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

std::vector<double> power_sum_naive(const Matrix& drm) {
    std::vector<double> p(drm.cols(), 0.0);
    for (std::size_t i = 0; i < drm.rows(); ++i) {
        const auto f = dft_naive(drm.row(i));
        for (std::size_t k = 0; k < p.size(); ++k) p[k] += std::norm(f[k]);
    }
    return p;
}

}  // namespace rsm::reference
