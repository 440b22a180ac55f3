#include "rsm/forward_model.hpp"

#include <cmath>
#include <string>

#include "rsm/error.hpp"

namespace rsm {

namespace {

// Row loops only pay for a thread team once there is enough work per row.
constexpr std::size_t kParallelMinWork = 4096;

bool worth_parallel(std::size_t rows, std::size_t cols) { return rows > 1 && rows * cols >= kParallelMinWork; }

void check_finite_nonneg(const Matrix& d) {
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double v = d.data()[k];
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError("response matrix entry " + std::to_string(k) + " is negative or non-finite");
        }
    }
}

void fingerprint(const Matrix& d, double out[2]) {
    double s = 0.0;
    double w = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        s += d.data()[k];
        w += d.data()[k] * static_cast<double>((k % 97) + 1);
    }
    out[0] = s;
    out[1] = w;
}

std::string shape_str(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

// Spectrum of Phi x summed over rows: S[k] = sum_i D_i[k] X_i[k]. Rows are
// summed in index order per bin so the result does not depend on threading.
void sum_row_products(const SpectralPlan& plan, const std::vector<cplx>& row_ffts, std::vector<cplx>& out) {
    const std::size_t m = plan.rows();
    const std::size_t n = plan.cols();
    out.assign(n, cplx(0.0, 0.0));
#pragma omp parallel for schedule(static) if (worth_parallel(m, n))
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i < m; ++i) acc += plan.row_spectrum(i)[k] * row_ffts[i * n + k];
        out[k] = acc;
    }
}

std::vector<cplx> forward_rows(const Dft& dft, const Matrix& x) {
    const std::size_t m = x.rows();
    const std::size_t n = x.cols();
    std::vector<cplx> out(m * n);
#pragma omp parallel for schedule(static) if (worth_parallel(m, n))
    for (std::size_t i = 0; i < m; ++i) dft.forward(x.row(i), std::span<cplx>(out.data() + i * n, n));
    return out;
}

}  // namespace

ResponseMatrix::ResponseMatrix(Matrix drm) : drm_(std::move(drm)), degenerate_(true) {
    if (drm_.cols() < 2) throw DimensionError("response matrix needs at least 2 columns, got " + shape_str(drm_.rows(), drm_.cols()));
    check_finite_nonneg(drm_);
    for (double v : drm_.data()) {
        if (v > 0.0) {
            degenerate_ = false;
            break;
        }
    }
}

SpectralPlan::SpectralPlan(std::shared_ptr<const Shared> shared, double rho)
    : shared_(std::move(shared)), rho_(rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("spectral plan: rho must be positive, got " + std::to_string(rho));
    denom_.resize(shared_->cols);
    for (std::size_t k = 0; k < denom_.size(); ++k) denom_[k] = 1.0 + shared_->power_sum[k] / rho;
}

SpectralPlan SpectralPlan::build(const ResponseMatrix& drm, double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("spectral plan: rho must be positive, got " + std::to_string(rho));
    auto shared = std::make_shared<Shared>();
    const std::size_t m = drm.rows();
    const std::size_t n = drm.cols();
    shared->rows = m;
    shared->cols = n;
    const Dft dft(n);
    shared->spectra = forward_rows(dft, drm.matrix());
    shared->power_sum.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += std::norm(shared->spectra[i * n + k]);
        shared->power_sum[k] = acc;
    }
    fingerprint(drm.matrix(), shared->fingerprint);
    return SpectralPlan(std::move(shared), rho);
}

SpectralPlan SpectralPlan::with_rho(double rho) const { return SpectralPlan(shared_, rho); }

bool SpectralPlan::built_from(const ResponseMatrix& drm) const noexcept {
    if (drm.rows() != rows() || drm.cols() != cols()) return false;
    double fp[2];
    fingerprint(drm.matrix(), fp);
    return fp[0] == shared_->fingerprint[0] && fp[1] == shared_->fingerprint[1];
}

SpectralPlan build_spectral_plan(const ResponseMatrix& drm, double rho) { return SpectralPlan::build(drm, rho); }

Signal apply_forward(const SpectralPlan& plan, const Matrix& image) {
    if (image.rows() != plan.rows() || image.cols() != plan.cols()) {
        throw DimensionError("apply_forward: image " + shape_str(image.rows(), image.cols()) + " vs response " +
                             shape_str(plan.rows(), plan.cols()));
    }
    const std::size_t n = plan.cols();
    const Dft dft(n);
    const auto row_ffts = forward_rows(dft, image);
    std::vector<cplx> spec;
    sum_row_products(plan, row_ffts, spec);
    dft.inverse(spec, spec);
    Signal s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = spec[j].real();
    return s;
}

Signal apply_forward(const ResponseMatrix& drm, const Matrix& image) {
    if (!image.same_shape(drm.matrix())) {
        throw DimensionError("apply_forward: image " + shape_str(image.rows(), image.cols()) + " vs response " +
                             shape_str(drm.rows(), drm.cols()));
    }
    return apply_forward(SpectralPlan::build(drm, 1.0), image);
}

Matrix apply_adjoint(const SpectralPlan& plan, const Signal& sig) {
    const std::size_t m = plan.rows();
    const std::size_t n = plan.cols();
    if (sig.size() != n) {
        throw DimensionError("apply_adjoint: signal length " + std::to_string(sig.size()) + " vs " + std::to_string(n) +
                             " columns");
    }
    const Dft dft(n);
    std::vector<cplx> ys(n);
    dft.forward(sig.data(), ys);
    Matrix g(m, n);
#pragma omp parallel for schedule(static) if (worth_parallel(m, n))
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<cplx> buf(n);
        const auto di = plan.row_spectrum(i);
        for (std::size_t k = 0; k < n; ++k) buf[k] = std::conj(di[k]) * ys[k];
        dft.inverse(buf, buf);
        auto gi = g.row(i);
        for (std::size_t k = 0; k < n; ++k) gi[k] = buf[k].real();
    }
    return g;
}

Matrix apply_adjoint(const ResponseMatrix& drm, const Signal& sig) {
    if (sig.size() != drm.cols()) {
        throw DimensionError("apply_adjoint: signal length " + std::to_string(sig.size()) + " vs " +
                             std::to_string(drm.cols()) + " columns");
    }
    return apply_adjoint(SpectralPlan::build(drm, 1.0), sig);
}

Matrix solve_regularized_normal(const SpectralPlan& plan, const ResponseMatrix& drm, const Matrix& x) {
    if (!plan.built_from(drm)) {
        throw DimensionError("solve_regularized_normal: plan " + shape_str(plan.rows(), plan.cols()) +
                             " was not built from response " + shape_str(drm.rows(), drm.cols()));
    }
    if (!x.same_shape(drm.matrix())) {
        throw DimensionError("solve_regularized_normal: x " + shape_str(x.rows(), x.cols()) + " vs response " +
                             shape_str(drm.rows(), drm.cols()));
    }
    const std::size_t m = plan.rows();
    const std::size_t n = plan.cols();
    const double rho = plan.rho();
    const Dft dft(n);

    const auto xs = forward_rows(dft, x);
    std::vector<cplx> q;
    sum_row_products(plan, xs, q);
    const auto denom = plan.denom();
    for (std::size_t k = 0; k < n; ++k) q[k] /= denom[k];

    const double inv_rho = 1.0 / rho;
    const double inv_rho2 = inv_rho * inv_rho;
    Matrix a(m, n);
#pragma omp parallel for schedule(static) if (worth_parallel(m, n))
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<cplx> buf(n);
        const auto di = plan.row_spectrum(i);
        for (std::size_t k = 0; k < n; ++k) buf[k] = std::conj(di[k]) * q[k];
        dft.inverse(buf, buf);
        const auto xi = x.row(i);
        auto ai = a.row(i);
        for (std::size_t k = 0; k < n; ++k) ai[k] = xi[k] * inv_rho - buf[k].real() * inv_rho2;
    }
    return a;
}

}  // namespace rsm
