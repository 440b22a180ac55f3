#include "rsm/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "rsm/log.hpp"
#include "rsm/tensor_io.hpp"

namespace rsm {

void AdmmConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 0");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (!(rho_start > 0.0) || !(rho_end > 0.0) || !std::isfinite(rho_end)) throw ConfigError("rho must be > 0");
    if (rho_start > rho_end) throw ConfigError("rho schedule must be non-decreasing (rho_start <= rho_end)");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
    denoiser.validate();
}

double AdmmConfig::rho(int k) const {
    if (iterations <= 1 || rho_start == rho_end) return rho_start;
    const double frac = static_cast<double>(k - 1) / static_cast<double>(iterations - 1);
    return rho_start * std::pow(rho_end / rho_start, frac);
}

void MlemConfig::validate() const {
    if (iterations < 1) throw ConfigError("MLEM iterations must be >= 1");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("MRP beta must be >= 0");
    if (median_radius < 1) throw ConfigError("MRP median radius must be >= 1");
    if (!(epsilon > 0.0)) throw ConfigError("MLEM epsilon must be > 0");
}

std::string SolverTrace::to_csv() const {
    std::string out = "k,rho,primal_b,primal_c,data_fit,l1,log_likelihood\n";
    for (const auto& r : records) {
        out += std::to_string(r.k) + "," + io::format_double(r.rho) + "," + io::format_double(r.primal_b) + "," +
               io::format_double(r.primal_c) + "," + io::format_double(r.data_fit) + "," + io::format_double(r.l1) + "," +
               (std::isnan(r.log_likelihood) ? std::string() : io::format_double(r.log_likelihood)) + "\n";
    }
    return out;
}

Matrix soft_threshold(const Matrix& x, double t) {
    if (!(t >= 0.0)) throw ConfigError("soft threshold must be >= 0");
    Matrix out(x.rows(), x.cols());
    const auto in = x.data();
    auto o = out.data();
    for (std::size_t k = 0; k < in.size(); ++k) {
        const double mag = std::abs(in[k]) - t;
        o[k] = mag > 0.0 ? std::copysign(mag, in[k]) : 0.0;
    }
    return out;
}

namespace {

void check_inputs(const ResponseMatrix& drm, const Signal& y) {
    if (y.size() != drm.cols()) {
        throw DimensionError("measurement length " + std::to_string(y.size()) + " does not match DRM with " +
                             std::to_string(drm.cols()) + " columns");
    }
    if (drm.degenerate()) warn("response matrix is all zero; the data term carries no information");
}

double diff_norm(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a.data()[k] - b.data()[k];
        s += d * d;
    }
    return std::sqrt(s);
}

double half_residual(const SpectralPlan& plan, const Signal& y, const Matrix& a) {
    const auto s = apply_forward(plan, a);
    double acc = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) acc += (y[j] - s[j]) * (y[j] - s[j]);
    return 0.5 * acc;
}

void clamp_nonnegative(Matrix& a) {
    for (auto& v : a.data()) v = std::max(v, 0.0);
}

}  // namespace

SolverResult reconstruct_l1_dnn(const ResponseMatrix& drm, const Signal& y, const AdmmConfig& cfg,
                                const IterationObserver& observer) {
    cfg.validate();
    check_inputs(drm, y);
    const std::size_t m = drm.rows();
    const std::size_t n = drm.cols();
    const auto base = SpectralPlan::build(drm, 1.0);
    const Matrix phi_t_y = apply_adjoint(base, y);
    auto denoiser = make_denoiser(cfg.denoiser);

    Matrix a(m, n), b(m, n), c(m, n), w1(m, n), w2(m, n), x(m, n), v(m, n);
    SolverTrace trace;
    for (int k = 1; k <= cfg.iterations; ++k) {
        const double rho1 = cfg.rho(k);
        const double rho2 = rho1;
        const auto plan = base.with_rho(rho1 + rho2);

        // x = Phi'y + rho1 (b + w1/rho1) + rho2 (c + w2/rho2)
        for (std::size_t q = 0; q < x.size(); ++q) {
            x.data()[q] = phi_t_y.data()[q] + rho1 * (b.data()[q] + w1.data()[q] / rho1) +
                          rho2 * (c.data()[q] + w2.data()[q] / rho2);
        }
        a = solve_regularized_normal(plan, drm, x);

        for (std::size_t q = 0; q < v.size(); ++q) v.data()[q] = a.data()[q] - w1.data()[q] / rho1;
        b = soft_threshold(v, cfg.lambda / rho1);
        for (std::size_t q = 0; q < w1.size(); ++q) w1.data()[q] += rho1 * (b.data()[q] - a.data()[q]);

        for (std::size_t q = 0; q < v.size(); ++q) v.data()[q] = a.data()[q] - w2.data()[q] / rho2;
        try {
            c = denoiser->apply(v, NoiseLevel(cfg.gamma / rho2));
        } catch (const std::exception& e) {
            throw SolverError(k, std::string("denoiser failed: ") + e.what());
        }
        if (!c.same_shape(a) || !c.all_finite()) throw SolverError(k, "denoiser returned a malformed image");
        for (std::size_t q = 0; q < w2.size(); ++q) w2.data()[q] += rho2 * (c.data()[q] - a.data()[q]);

        IterationRecord rec;
        rec.k = k;
        rec.rho = rho1;
        rec.primal_b = diff_norm(b, a);
        rec.primal_c = diff_norm(c, a);
        rec.data_fit = half_residual(base, y, a);
        rec.l1 = cfg.lambda * norm1(a.data());
        trace.records.push_back(rec);
        if (observer) observer(SolverState{k, &a, &b, &c, &w1, &w2});

        if (cfg.tolerance > 0.0) {
            const double scale = std::max(norm2(a.data()), 1e-300);
            if (std::max(rec.primal_b, rec.primal_c) / scale <= cfg.tolerance) break;
        }
    }
    if (cfg.clamp_output) clamp_nonnegative(a);
    return {std::move(a), std::move(trace)};
}

SolverResult reconstruct_l1(const ResponseMatrix& drm, const Signal& y, const AdmmConfig& cfg,
                            const IterationObserver& observer) {
    AdmmConfig local = cfg;
    local.denoiser = DenoiserSpec::identity();
    local.validate();
    check_inputs(drm, y);
    const std::size_t m = drm.rows();
    const std::size_t n = drm.cols();
    const auto base = SpectralPlan::build(drm, 1.0);
    const Matrix phi_t_y = apply_adjoint(base, y);

    Matrix a(m, n), b(m, n), w1(m, n), x(m, n), v(m, n);
    SolverTrace trace;
    for (int k = 1; k <= local.iterations; ++k) {
        const double rho1 = local.rho(k);
        const auto plan = base.with_rho(rho1);
        for (std::size_t q = 0; q < x.size(); ++q) {
            x.data()[q] = phi_t_y.data()[q] + rho1 * (b.data()[q] + w1.data()[q] / rho1);
        }
        a = solve_regularized_normal(plan, drm, x);
        for (std::size_t q = 0; q < v.size(); ++q) v.data()[q] = a.data()[q] - w1.data()[q] / rho1;
        b = soft_threshold(v, local.lambda / rho1);
        for (std::size_t q = 0; q < w1.size(); ++q) w1.data()[q] += rho1 * (b.data()[q] - a.data()[q]);

        IterationRecord rec;
        rec.k = k;
        rec.rho = rho1;
        rec.primal_b = diff_norm(b, a);
        rec.data_fit = half_residual(base, y, a);
        rec.l1 = local.lambda * norm1(a.data());
        trace.records.push_back(rec);
        if (observer) observer(SolverState{k, &a, &b, nullptr, &w1, nullptr});

        if (local.tolerance > 0.0) {
            const double scale = std::max(norm2(a.data()), 1e-300);
            if (rec.primal_b / scale <= local.tolerance) break;
        }
    }
    if (local.clamp_output) clamp_nonnegative(a);
    return {std::move(a), std::move(trace)};
}

SolverResult reconstruct_mlem_mrp(const ResponseMatrix& drm, const Signal& y, const MlemConfig& cfg,
                                  const IterationObserver& observer) {
    cfg.validate();
    check_inputs(drm, y);
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (y[j] < 0.0) {
            throw ConfigError("MLEM needs nonnegative counts; y[" + std::to_string(j) + "] = " + std::to_string(y[j]));
        }
    }
    const std::size_t m = drm.rows();
    const std::size_t n = drm.cols();
    const double eps = cfg.epsilon;
    const auto plan = SpectralPlan::build(drm, 1.0);

    // Sensitivity s = Phi' 1. Column sums of a nonnegative operator; clip FFT round-off.
    Matrix sens = apply_adjoint(plan, Signal(std::vector<double>(n, 1.0)));
    std::size_t frozen = 0;
    for (auto& s : sens.data()) {
        if (s <= eps) {
            s = 0.0;
            ++frozen;
        }
    }
    if (frozen > 0) warn(std::to_string(frozen) + " pixel(s) have zero sensitivity and stay at 0");

    const double total_counts = ordered_sum(y.data());
    const double total_sens = ordered_sum(sens.data());
    const double start = (total_counts > 0.0 && total_sens > 0.0) ? total_counts / total_sens : 1.0;
    Matrix a(m, n);
    for (std::size_t q = 0; q < a.size(); ++q) a.data()[q] = sens.data()[q] > 0.0 ? start : 0.0;

    SolverTrace trace;
    std::vector<double> ratio(n);
    for (int k = 1; k <= cfg.iterations; ++k) {
        const auto proj = apply_forward(plan, a);
        for (std::size_t j = 0; j < n; ++j) ratio[j] = y[j] / std::max(proj[j], eps);
        const Matrix back = apply_adjoint(plan, Signal(ratio));
        const Matrix med = cfg.beta > 0.0 ? median_filter(a, cfg.median_radius) : a;

        for (std::size_t q = 0; q < a.size(); ++q) {
            const double s = sens.data()[q];
            if (s == 0.0) continue;
            const double aq = a.data()[q];
            double penalty = 1.0;
            if (cfg.beta > 0.0) {
                const double md = med.data()[q];
                penalty = 1.0 + cfg.beta * (aq - md) / std::max(md + eps, eps);
            }
            a.data()[q] = aq * std::max(back.data()[q], 0.0) / std::max(s * penalty, eps);
        }

        IterationRecord rec;
        rec.k = k;
        const auto fit = apply_forward(plan, a);
        double ll = 0.0;
        double rss = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double q = std::max(fit[j], eps);
            ll += (y[j] > 0.0 ? y[j] * std::log(q) : 0.0) - q;
            rss += (y[j] - fit[j]) * (y[j] - fit[j]);
        }
        rec.data_fit = 0.5 * rss;
        rec.log_likelihood = ll;
        trace.records.push_back(rec);
        if (observer) observer(SolverState{k, &a, nullptr, nullptr, nullptr, nullptr});
    }
    return {std::move(a), std::move(trace)};
}

}  // namespace rsm
