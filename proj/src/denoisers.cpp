#include "rsm/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsm/bridge.hpp"
#include "rsm/error.hpp"

namespace rsm {

NoiseLevel::NoiseLevel(double variance) : variance_(variance) {
    if (!std::isfinite(variance) || variance < 0.0) {
        throw ConfigError("noise variance must be finite and >= 0, got " + std::to_string(variance));
    }
}

double NoiseLevel::sigma() const noexcept { return std::sqrt(variance_); }

std::string DenoiserSpec::kind_name() const {
    struct Visitor {
        std::string operator()(const IdentityParams&) const { return "identity"; }
        std::string operator()(const GaussianParams&) const { return "gaussian"; }
        std::string operator()(const MedianParams&) const { return "median"; }
        std::string operator()(const TvParams&) const { return "tv"; }
        std::string operator()(const ExternalParams&) const { return "external"; }
    };
    return std::visit(Visitor{}, params);
}

void DenoiserSpec::validate() const {
    if (auto* g = std::get_if<GaussianParams>(&params)) {
        if (!std::isfinite(g->width_scale) || g->width_scale < 0.0) throw ConfigError("gaussian width scale must be >= 0");
    } else if (auto* md = std::get_if<MedianParams>(&params)) {
        if (md->radius < 1) throw ConfigError("median radius must be >= 1");
    } else if (auto* tv = std::get_if<TvParams>(&params)) {
        if (tv->max_iterations < 1) throw ConfigError("tv iterations must be >= 1");
        if (!(tv->tolerance > 0.0)) throw ConfigError("tv tolerance must be > 0");
    } else if (auto* ex = std::get_if<ExternalParams>(&params)) {
        if (ex->executable.empty()) throw ConfigError("external denoiser needs an executable");
        if (!(ex->timeout_seconds > 0.0)) throw ConfigError("external denoiser timeout must be > 0");
    }
}

DenoiserSpec DenoiserSpec::from_name(const std::string& name) {
    if (name == "identity") return identity();
    if (name == "gaussian") return gaussian();
    if (name == "median") return median();
    if (name == "tv") return tv();
    if (name == "tv-rel") return tv(50, 1e-5, true);
    throw ConfigError("unknown denoiser '" + name + "' (expected identity, gaussian, median, tv or tv-rel)");
}

// ---------------------------------------------------------------------------
// Gaussian

std::vector<double> gaussian_taps(double sigma) {
    if (!(sigma > 0.0)) return {1.0};
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        taps[k + radius] = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
        sum += taps[k + radius];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

Matrix gaussian_blur(const Matrix& image, double sigma) {
    if (!(sigma > 0.0)) return image;
    const auto taps = gaussian_taps(sigma);
    const long radius = static_cast<long>(taps.size() / 2);
    const long m = static_cast<long>(image.rows());
    const long n = static_cast<long>(image.cols());

    Matrix tmp(image.rows(), image.cols());
#pragma omp parallel for schedule(static) if (m * n >= 4096)
    for (long i = 0; i < m; ++i) {
        for (long j = 0; j < n; ++j) {
            double acc = 0.0;
            for (long k = -radius; k <= radius; ++k) {
                const long jj = ((j + k) % n + n) % n;
                acc += taps[k + radius] * image(i, jj);
            }
            tmp(i, j) = acc;
        }
    }
    Matrix out(image.rows(), image.cols());
#pragma omp parallel for schedule(static) if (m * n >= 4096)
    for (long i = 0; i < m; ++i) {
        for (long j = 0; j < n; ++j) {
            double acc = 0.0;
            for (long k = -radius; k <= radius; ++k) {
                const long ii = std::clamp(i + k, 0L, m - 1);
                acc += taps[k + radius] * tmp(ii, j);
            }
            out(i, j) = acc;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Median

Matrix median_filter(const Matrix& image, int radius) {
    if (radius < 1) throw ConfigError("median radius must be >= 1");
    const long m = static_cast<long>(image.rows());
    const long n = static_cast<long>(image.cols());
    const long r = radius;
    const std::size_t window = static_cast<std::size_t>((2 * r + 1) * (2 * r + 1));
    Matrix out(image.rows(), image.cols());
#pragma omp parallel for schedule(static) if (m * n >= 4096)
    for (long i = 0; i < m; ++i) {
        std::vector<double> buf(window);
        for (long j = 0; j < n; ++j) {
            std::size_t c = 0;
            for (long di = -r; di <= r; ++di) {
                const long ii = std::clamp(i + di, 0L, m - 1);
                for (long dj = -r; dj <= r; ++dj) buf[c++] = image(ii, ((j + dj) % n + n) % n);
            }
            auto mid = buf.begin() + static_cast<long>(window / 2);
            std::nth_element(buf.begin(), mid, buf.end());
            out(i, j) = *mid;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Total variation
//
// Gradient: polar axis forward difference with zero at the last row,
// azimuth axis periodic forward difference. div = -grad^T.

namespace {

struct Field2 {
    Matrix polar;
    Matrix azimuth;
};

void gradient(const Matrix& u, Field2& g) {
    const std::size_t m = u.rows();
    const std::size_t n = u.cols();
#pragma omp parallel for schedule(static) if (m * n >= 4096)
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            g.polar(i, j) = (i + 1 < m) ? u(i + 1, j) - u(i, j) : 0.0;
            g.azimuth(i, j) = u(i, (j + 1) % n) - u(i, j);
        }
    }
}

void divergence(const Field2& p, Matrix& d) {
    const std::size_t m = d.rows();
    const std::size_t n = d.cols();
#pragma omp parallel for schedule(static) if (m * n >= 4096)
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            if (i + 1 < m) v += p.polar(i, j);
            if (i > 0) v -= p.polar(i - 1, j);
            v += p.azimuth(i, j) - p.azimuth(i, (j + n - 1) % n);
            d(i, j) = v;
        }
    }
}

// TV(u) - <grad u, p>, with per-row partials summed in order.
double gap_terms(const Matrix& u, const Field2& p, Field2& scratch) {
    gradient(u, scratch);
    const std::size_t m = u.rows();
    const std::size_t n = u.cols();
    std::vector<double> rows(m, 0.0);
#pragma omp parallel for schedule(static) if (m * n >= 4096)
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double gp = scratch.polar(i, j);
            const double ga = scratch.azimuth(i, j);
            acc += std::hypot(gp, ga) - (gp * p.polar(i, j) + ga * p.azimuth(i, j));
        }
        rows[i] = acc;
    }
    return ordered_sum(rows);
}

}  // namespace

double total_variation(const Matrix& image) {
    Field2 g{Matrix(image.rows(), image.cols()), Matrix(image.rows(), image.cols())};
    gradient(image, g);
    std::vector<double> rows(image.rows(), 0.0);
    for (std::size_t i = 0; i < image.rows(); ++i) {
        for (std::size_t j = 0; j < image.cols(); ++j) rows[i] += std::hypot(g.polar(i, j), g.azimuth(i, j));
    }
    return ordered_sum(rows);
}

TvResult tv_prox(const Matrix& f, double weight, const TvParams& params) {
    if (!std::isfinite(weight) || weight < 0.0) throw ConfigError("tv weight must be finite and >= 0");
    if (params.max_iterations < 1 || !(params.tolerance > 0.0)) throw ConfigError("invalid tv parameters");
    const double tv_in = total_variation(f);
    if (weight == 0.0 || tv_in == 0.0) return {f, 0, 0.0};

    const std::size_t m = f.rows();
    const std::size_t n = f.cols();
    const double target = params.tolerance * weight * tv_in;
    const double step = 1.0 / (8.0 * weight);

    Field2 p{Matrix(m, n), Matrix(m, n)};
    Field2 r{Matrix(m, n), Matrix(m, n)};
    Field2 g{Matrix(m, n), Matrix(m, n)};
    Field2 scratch{Matrix(m, n), Matrix(m, n)};
    Matrix u(m, n);
    Matrix div(m, n);
    double t = 1.0;

    auto primal_from = [&](const Field2& q, Matrix& out) {
        divergence(q, div);
        for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] = f.data()[k] + weight * div.data()[k];
    };

    int it = 0;
    double gap = 0.0;
    while (it < params.max_iterations) {
        primal_from(r, u);
        gradient(u, g);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double mom = (t - 1.0) / t_next;
#pragma omp parallel for schedule(static) if (m * n >= 4096)
        for (std::size_t k = 0; k < m * n; ++k) {
            const double qp = r.polar.data()[k] + step * g.polar.data()[k];
            const double qa = r.azimuth.data()[k] + step * g.azimuth.data()[k];
            const double scale = 1.0 / std::max(1.0, std::hypot(qp, qa));
            const double np = qp * scale;
            const double na = qa * scale;
            r.polar.data()[k] = np + mom * (np - p.polar.data()[k]);
            r.azimuth.data()[k] = na + mom * (na - p.azimuth.data()[k]);
            p.polar.data()[k] = np;
            p.azimuth.data()[k] = na;
        }
        t = t_next;
        ++it;
        if (it % 5 == 0 || it == params.max_iterations) {
            primal_from(p, u);
            gap = weight * gap_terms(u, p, scratch);
            if (gap <= target) break;
        }
    }
    primal_from(p, u);
    return {std::move(u), it, gap};
}

// ---------------------------------------------------------------------------
// Dispatch

namespace {

class IdentityDenoiser final : public Denoiser {
public:
    Matrix apply(const Matrix& image, NoiseLevel) override { return image; }
};

class GaussianDenoiser final : public Denoiser {
public:
    explicit GaussianDenoiser(GaussianParams p) : p_(p) {}
    Matrix apply(const Matrix& image, NoiseLevel level) override {
        return gaussian_blur(image, p_.width_scale * level.sigma());
    }

private:
    GaussianParams p_;
};

class MedianDenoiser final : public Denoiser {
public:
    explicit MedianDenoiser(MedianParams p) : p_(p) {}
    Matrix apply(const Matrix& image, NoiseLevel) override { return median_filter(image, p_.radius); }

private:
    MedianParams p_;
};

class TvDenoiser final : public Denoiser {
public:
    explicit TvDenoiser(TvParams p) : p_(p) {}
    Matrix apply(const Matrix& image, NoiseLevel level) override {
        const double weight = p_.peak_relative ? level.variance() * max_abs(image.data()) : level.variance();
        return tv_prox(image, weight, p_).image;
    }

private:
    TvParams p_;
};

class ExternalDenoiser final : public Denoiser {
public:
    explicit ExternalDenoiser(const ExternalParams& p) : client_(p) {}
    Matrix apply(const Matrix& image, NoiseLevel level) override { return client_.denoise(image, level); }

private:
    bridge::BridgeClient client_;
};

}  // namespace

std::unique_ptr<Denoiser> make_denoiser(const DenoiserSpec& spec) {
    spec.validate();
    struct Visitor {
        std::unique_ptr<Denoiser> operator()(const IdentityParams&) const { return std::make_unique<IdentityDenoiser>(); }
        std::unique_ptr<Denoiser> operator()(const GaussianParams& p) const { return std::make_unique<GaussianDenoiser>(p); }
        std::unique_ptr<Denoiser> operator()(const MedianParams& p) const { return std::make_unique<MedianDenoiser>(p); }
        std::unique_ptr<Denoiser> operator()(const TvParams& p) const { return std::make_unique<TvDenoiser>(p); }
        std::unique_ptr<Denoiser> operator()(const ExternalParams& p) const { return std::make_unique<ExternalDenoiser>(p); }
    };
    return std::visit(Visitor{}, spec.params);
}

Matrix denoise(const DenoiserSpec& spec, const Matrix& image, NoiseLevel level) {
    if (!image.all_finite()) throw ConfigError("denoise: input image has non-finite values");
    return make_denoiser(spec)->apply(image, level);
}

}  // namespace rsm
