#include <gtest/gtest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "rsm/denoisers.hpp"
#include "rsm/error.hpp"
#include "rsm/rng.hpp"

using namespace rsm;

namespace {

struct TvCase {
    const char* name;
    double weight;
    std::vector<double> input;
    std::vector<double> expected;
};

const std::vector<TvCase>& tv_cases() {
    static const std::vector<TvCase> cases = {
#include "oracles/tv_prox_cases.inc"
    };
    return cases;
}

double max_diff(const Matrix& a, const Matrix& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a.data()[k] - b.data()[k]));
    return d;
}

double l2_diff(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a.data()[k] - b.data()[k]) * (a.data()[k] - b.data()[k]);
    return std::sqrt(s);
}

Matrix random_image(Rng& rng, std::size_t m, std::size_t n) { return oracle::random_matrix(rng, m, n, -2.0, 3.0); }

const TvParams kTight{5000, 1e-12};

}  // namespace

TEST(NoiseLevel, Validation) {
    EXPECT_THROW(NoiseLevel(-1.0), ConfigError);
    EXPECT_THROW(NoiseLevel(std::nan("")), ConfigError);
    EXPECT_DOUBLE_EQ(NoiseLevel(4.0).sigma(), 2.0);
}

TEST(DenoiserSpec, NamesAndValidation) {
    EXPECT_EQ(DenoiserSpec::from_name("tv").kind_name(), "tv");
    EXPECT_EQ(DenoiserSpec::from_name("median").kind_name(), "median");
    EXPECT_THROW(DenoiserSpec::from_name("bm3d"), ConfigError);
    EXPECT_THROW(DenoiserSpec::median(0).validate(), ConfigError);
    EXPECT_THROW(DenoiserSpec::tv(0).validate(), ConfigError);
    EXPECT_THROW(DenoiserSpec::tv(10, 0.0).validate(), ConfigError);
    EXPECT_THROW(DenoiserSpec::external("").validate(), ConfigError);
}

TEST(Denoise, IdentityIsBitwise) {
    Rng rng(1);
    const Matrix img = random_image(rng, 5, 9);
    EXPECT_EQ(denoise(DenoiserSpec::identity(), img, NoiseLevel(3.0)), img);
}

TEST(Denoise, ConstantsAreFixedPoints) {
    const Matrix c = Matrix::filled(6, 10, 2.5);
    for (const auto& spec : {DenoiserSpec::gaussian(), DenoiserSpec::median(), DenoiserSpec::tv()}) {
        EXPECT_LE(max_diff(denoise(spec, c, NoiseLevel(0.7)), c), 1e-10) << spec.kind_name();
    }
}

TEST(Denoise, RejectsNonFiniteInput) {
    Matrix img(2, 2);
    img(0, 0) = std::nan("");
    EXPECT_THROW(denoise(DenoiserSpec::tv(), img, NoiseLevel(1.0)), ConfigError);
}

TEST(Median, SingleImpulseVanishes) {
    Matrix img(9, 9);
    img(4, 4) = 1.0;
    const Matrix out = median_filter(img, 1);
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Median, AzimuthWrapsPolarReplicates) {
    // Column 0 and column n-1 are neighbours; rows do not wrap.
    Matrix img(3, 6);
    for (std::size_t i = 0; i < 3; ++i) {
        img(i, 0) = 1.0;
        img(i, 5) = 1.0;
    }
    const Matrix out = median_filter(img, 1);
    // With wrapping, every pixel of columns 0 and 5 sees 6 ones out of 9.
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(out(i, 0), 1.0);
        EXPECT_EQ(out(i, 5), 1.0);
        EXPECT_EQ(out(i, 2), 0.0);
    }
    // Top row replicates itself upward: a one-row stripe at the top survives.
    Matrix top(4, 6);
    for (std::size_t j = 0; j < 6; ++j) top(0, j) = 1.0;
    EXPECT_EQ(median_filter(top, 1)(0, 3), 1.0);
}

TEST(Median, BoundedByInputRange) {
    Rng rng(2);
    const Matrix img = random_image(rng, 7, 11);
    const Matrix out = median_filter(img, 2);
    EXPECT_LE(max_abs(out.data()), max_abs(img.data()) + 1e-9);
}

TEST(Gaussian, TapsAreNormalized) {
    const auto taps = gaussian_taps(1.3);
    ASSERT_EQ(taps.size(), 2u * 6u + 1u);
    double s = 0.0;
    for (double t : taps) s += t;
    EXPECT_NEAR(s, 1.0, 1e-15);
    EXPECT_NEAR(taps[6] / taps[7], std::exp(1.0 / (2 * 1.3 * 1.3)), 1e-12);
    EXPECT_EQ(gaussian_taps(0.0).size(), 1u);
}

TEST(Gaussian, ZeroWidthIsIdentity) {
    Rng rng(3);
    const Matrix img = random_image(rng, 4, 8);
    EXPECT_EQ(denoise(DenoiserSpec::gaussian(0.0), img, NoiseLevel(1.0)), img);
    EXPECT_EQ(denoise(DenoiserSpec::gaussian(1.0), img, NoiseLevel(0.0)), img);
}

TEST(Gaussian, MaxNormBound) {
    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
        const Matrix img = random_image(rng, 8, 13);
        const Matrix out = denoise(DenoiserSpec::gaussian(1.0), img, NoiseLevel(rng.uniform(0.1, 9.0)));
        EXPECT_LE(max_abs(out.data()), max_abs(img.data()) + 1e-9);
    }
}

TEST(Gaussian, PreservesMassUnderWrap) {
    // Azimuth wrapping and polar replication both keep row-constant mass for
    // interior rows; with a single row the total is preserved exactly.
    Rng rng(5);
    const Matrix img = random_image(rng, 1, 40);
    const Matrix out = gaussian_blur(img, 2.0);
    EXPECT_NEAR(ordered_sum(out.data()), ordered_sum(img.data()), 1e-12);
}

TEST(Gaussian, AzimuthImpulseIsSymmetricAcrossTheSeam) {
    Matrix img(1, 20);
    img(0, 0) = 1.0;
    const Matrix out = gaussian_blur(img, 1.5);
    EXPECT_NEAR(out(0, 1), out(0, 19), 1e-15);
    EXPECT_NEAR(out(0, 3), out(0, 17), 1e-15);
}

TEST(Tv, MatchesFrozenConvexSolverValues) {
    for (const auto& c : tv_cases()) {
        const Matrix f(4, 4, c.input);
        const Matrix expected(4, 4, c.expected);
        const auto res = tv_prox(f, c.weight, kTight);
        EXPECT_LE(max_diff(res.image, expected), 1e-4) << c.name;
    }
}

TEST(Tv, MatchesPrimalDualOracle) {
    Rng rng(6);
    for (int t = 0; t < 5; ++t) {
        const Matrix f = random_image(rng, 5, 7);
        const double w = rng.uniform(0.05, 0.8);
        const Matrix ours = tv_prox(f, w, kTight).image;
        const Matrix ref = oracle::tv_prox_primal_dual(f, w, 20000);
        EXPECT_LE(max_diff(ours, ref), 1e-5) << "trial " << t;
    }
}

TEST(Tv, ProxOptimalityBeatsPerturbations) {
    // The prox minimizes 0.5|u-f|^2 + w TV(u); random perturbations never do better.
    Rng rng(7);
    const Matrix f = random_image(rng, 4, 6);
    const double w = 0.3;
    const Matrix u = tv_prox(f, w, kTight).image;
    auto objective = [&](const Matrix& v) {
        double s = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) s += 0.5 * (v.data()[k] - f.data()[k]) * (v.data()[k] - f.data()[k]);
        return s + w * total_variation(v);
    };
    const double best = objective(u);
    for (int t = 0; t < 200; ++t) {
        Matrix v = u;
        for (auto& x : v.data()) x += 1e-3 * rng.normal();
        EXPECT_GE(objective(v), best - 1e-9);
    }
}

TEST(Tv, ZeroWeightReturnsInput) {
    Rng rng(8);
    const Matrix f = random_image(rng, 6, 6);
    EXPECT_LE(max_diff(tv_prox(f, 0.0, TvParams{}).image, f), 1e-10);
    EXPECT_LE(max_diff(denoise(DenoiserSpec::tv(), f, NoiseLevel(0.0)), f), 1e-10);
}

TEST(Tv, Nonexpansive) {
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        const Matrix x = random_image(rng, 6, 9);
        const Matrix y = random_image(rng, 6, 9);
        const double w = rng.uniform(0.01, 1.0);
        const Matrix hx = tv_prox(x, w, kTight).image;
        const Matrix hy = tv_prox(y, w, kTight).image;
        EXPECT_LE(l2_diff(hx, hy), l2_diff(x, y) + 1e-6);
    }
}

TEST(Tv, DefaultStoppingRuleReportsGap) {
    Rng rng(10);
    const Matrix f = random_image(rng, 30, 40);
    const auto res = tv_prox(f, 0.2, TvParams{});
    EXPECT_GE(res.iterations, 1);
    EXPECT_LE(res.iterations, 50);
    EXPECT_GE(res.gap, -1e-9);
}

TEST(Tv, TotalVariationBoundaryRules) {
    // Azimuth is periodic: a single bright column has two vertical edges.
    Matrix img(3, 5);
    for (std::size_t i = 0; i < 3; ++i) img(i, 0) = 1.0;
    EXPECT_NEAR(total_variation(img), 6.0, 1e-14);
    // Polar is not periodic: a bright first row has one horizontal edge line.
    Matrix top(3, 5);
    for (std::size_t j = 0; j < 5; ++j) top(0, j) = 1.0;
    EXPECT_NEAR(total_variation(top), 5.0, 1e-14);
}

TEST(Tv, PeakRelativeScalesWeight) {
    Rng rng(11);
    const Matrix f = random_image(rng, 5, 8);
    const double peak = max_abs(f.data());
    const Matrix rel = denoise(DenoiserSpec::tv(5000, 1e-12, true), f, NoiseLevel(0.1));
    const Matrix abs = tv_prox(f, 0.1 * peak, kTight).image;
    EXPECT_LE(max_diff(rel, abs), 1e-8);
}
