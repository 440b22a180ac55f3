#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rsm/fft.hpp"
#include "rsm/matrix.hpp"

namespace rsm {

/// Detector response matrix D (m x n, nonnegative).
///
/// Row i is the circular convolution kernel applied to image row i. An
/// all-zero matrix is accepted but reported through degenerate(); the forward
/// operator is then identically zero.
class ResponseMatrix {
public:
    explicit ResponseMatrix(Matrix drm);

    std::size_t rows() const noexcept { return drm_.rows(); }
    std::size_t cols() const noexcept { return drm_.cols(); }
    const Matrix& matrix() const noexcept { return drm_; }
    bool degenerate() const noexcept { return degenerate_; }

private:
    Matrix drm_;
    bool degenerate_;
};

/// Per-row spectra of the response matrix plus the denominator
/// 1 + powerSum/rho used by the regularized normal-equation solve.
///
/// The spectra do not depend on rho, so with_rho() shares them and only
/// rebuilds the denominator.
class SpectralPlan {
public:
    static SpectralPlan build(const ResponseMatrix& drm, double rho);
    SpectralPlan with_rho(double rho) const;

    std::size_t rows() const noexcept { return shared_->rows; }
    std::size_t cols() const noexcept { return shared_->cols; }
    double rho() const noexcept { return rho_; }

    std::span<const cplx> row_spectrum(std::size_t i) const noexcept {
        return {shared_->spectra.data() + i * shared_->cols, shared_->cols};
    }
    /// sum_i |F(d_i)|^2
    std::span<const double> power_sum() const noexcept { return shared_->power_sum; }
    /// 1 + power_sum / rho
    std::span<const double> denom() const noexcept { return denom_; }

    /// True if this plan was built from `drm` (shape and content fingerprint).
    bool built_from(const ResponseMatrix& drm) const noexcept;

private:
    struct Shared {
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::vector<cplx> spectra;  // rows x cols, row-major
        std::vector<double> power_sum;
        double fingerprint[2] = {0.0, 0.0};
    };
    SpectralPlan(std::shared_ptr<const Shared> shared, double rho);

    std::shared_ptr<const Shared> shared_;
    double rho_;
    std::vector<double> denom_;
};

/// s[j] = sum_i sum_k D[i,k] A[i,(j-k) mod n], evaluated with per-row FFTs.
Signal apply_forward(const ResponseMatrix& drm, const Matrix& image);
Signal apply_forward(const SpectralPlan& plan, const Matrix& image);

/// G[i,k] = sum_j D[i,(j-k) mod n] sig[j]; the exact adjoint of apply_forward.
Matrix apply_adjoint(const ResponseMatrix& drm, const Signal& sig);
Matrix apply_adjoint(const SpectralPlan& plan, const Signal& sig);

SpectralPlan build_spectral_plan(const ResponseMatrix& drm, double rho);

/// Solves (Phi' Phi + rho I) a = x in O(m n log n) through the matrix
/// inversion lemma: a = x/rho - Phi' F^-1{ F(Phi x) / denom } / rho^2,
/// with rho taken from the plan.
Matrix solve_regularized_normal(const SpectralPlan& plan, const ResponseMatrix& drm, const Matrix& x);

}  // namespace rsm
