#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rsm/error.hpp"
#include "rsm/phantoms.hpp"

using namespace rsm;

namespace {

std::size_t count_nonzero(const Matrix& m) {
    std::size_t c = 0;
    for (double v : m.data()) c += v != 0.0;
    return c;
}

}  // namespace

TEST(Geometry, PixelCentres) {
    EXPECT_DOUBLE_EQ(pixel_theta(0, 75), std::numbers::pi * 0.5 / 75);
    EXPECT_DOUBLE_EQ(pixel_phi(179, 180), 2 * std::numbers::pi * 179.5 / 180);
    EXPECT_NEAR(angular_distance(0.3, 1.0, 0.3, 1.0), 0.0, 1e-7);
    EXPECT_NEAR(angular_distance(std::numbers::pi / 2, 0.0, std::numbers::pi / 2, std::numbers::pi), std::numbers::pi,
                1e-12);
}

TEST(Phantom, ShapeNames) {
    EXPECT_EQ(parse_shape("ring"), Shape::Ring);
    EXPECT_EQ(shape_name(Shape::Square), "square");
    EXPECT_THROW(parse_shape("blob"), ConfigError);
}

TEST(Phantom, TinyDiscHitsOnePixel) {
    PhantomSpec s;
    s.rows = 15;
    s.cols = 30;
    s.theta0 = pixel_theta(7, 15);
    s.phi0 = pixel_phi(11, 30);
    s.radius = 1e-3;
    const Matrix img = rasterize_phantom(s);
    EXPECT_EQ(count_nonzero(img), 1u);
    EXPECT_EQ(img(7, 11), 1.0);
}

TEST(Phantom, DiscNearPoleSpansMoreAzimuthPixels) {
    // The same angular disc covers more azimuth columns away from the equator.
    auto columns_at_centre = [](double theta0) {
        PhantomSpec s;
        s.theta0 = theta0;
        s.radius = 0.2;
        const Matrix img = rasterize_phantom(s);
        std::size_t best = 0;
        for (std::size_t i = 0; i < img.rows(); ++i) {
            std::size_t c = 0;
            for (std::size_t j = 0; j < img.cols(); ++j) c += img(i, j) != 0.0;
            best = std::max(best, c);
        }
        return best;
    };
    EXPECT_GT(columns_at_centre(0.5), columns_at_centre(std::numbers::pi / 2) + 5);
}

TEST(Phantom, RingHasHole) {
    PhantomSpec s;
    s.shape = Shape::Ring;
    s.radius = 0.3;
    s.thickness = 0.1;
    const Matrix img = rasterize_phantom(s);
    EXPECT_GT(count_nonzero(img), 0u);
    // pixel nearest the centre is empty
    const auto i = static_cast<std::size_t>(s.theta0 / std::numbers::pi * 75);
    const auto j = static_cast<std::size_t>(s.phi0 / (2 * std::numbers::pi) * 180);
    EXPECT_EQ(img(i, j), 0.0);
}

TEST(Phantom, Validation) {
    PhantomSpec s;
    s.theta0 = 0.05;
    s.radius = 0.2;
    EXPECT_THROW(s.validate(), ConfigError);
    s = PhantomSpec{};
    s.rows = 0;
    EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Phantom, ConfigRoundTrip) {
    PhantomSpec s;
    s.shape = Shape::Square;
    s.half_width = 0.123456789;
    s.phi0 = 0.5;
    const PhantomSpec back = PhantomSpec::from_config(KeyValues::parse(s.to_config().to_text()));
    EXPECT_EQ(back.shape, s.shape);
    EXPECT_EQ(back.half_width, s.half_width);
    EXPECT_EQ(back.phi0, s.phi0);
    EXPECT_EQ(rasterize_phantom(back), rasterize_phantom(s));
}

TEST(Suite, CountsAndIds) {
    const auto suite = make_test_suite(75, 180, 0);
    ASSERT_EQ(suite.size(), 20u);
    int disc = 0, ring = 0, square = 0;
    for (std::size_t k = 0; k < suite.size(); ++k) {
        EXPECT_EQ(suite[k].id, static_cast<int>(k));
        EXPECT_GT(max_abs(suite[k].image.data()), 0.0);
        switch (suite[k].spec.shape) {
            case Shape::Disc: ++disc; break;
            case Shape::Ring: ++ring; break;
            case Shape::Square: ++square; break;
        }
    }
    EXPECT_EQ(disc, 6);
    EXPECT_EQ(ring, 6);
    EXPECT_EQ(square, 8);
}

TEST(Suite, DeterministicPerSeed) {
    const auto a = make_test_suite(40, 80, 5);
    const auto b = make_test_suite(40, 80, 5);
    const auto c = make_test_suite(40, 80, 6);
    bool differs = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].image, b[k].image);
        differs = differs || !(a[k].image == c[k].image);
    }
    EXPECT_TRUE(differs);
}

TEST(Drm, ConstantWithoutPeak) {
    DrmSynthSpec s;
    s.rows = 6;
    s.cols = 12;
    s.peak_amplitude = 0.0;
    s.baseline = 0.25;
    const ResponseMatrix d = synth_drm(s);
    for (double v : d.matrix().data()) EXPECT_EQ(v, 0.25);
}

TEST(Drm, BoundsAndMirrorSymmetry) {
    const DrmSynthSpec s;
    const Matrix d = synth_drm(s).matrix();
    ASSERT_EQ(d.rows(), 75u);
    ASSERT_EQ(d.cols(), 180u);
    for (std::size_t i = 0; i < d.rows(); ++i) {
        EXPECT_DOUBLE_EQ(d(i, 0), s.baseline + s.peak_amplitude);
        for (std::size_t j = 0; j < d.cols(); ++j) {
            EXPECT_GE(d(i, j), s.baseline);
            if (j > 0) EXPECT_NEAR(d(i, j), d(i, d.cols() - j), 1e-12);
        }
    }
}

TEST(Drm, Validation) {
    DrmSynthSpec s;
    s.angular_width = 0.0;
    EXPECT_THROW(synth_drm(s), ConfigError);
    s = DrmSynthSpec{};
    s.baseline = -1;
    EXPECT_THROW(synth_drm(s), ConfigError);
}

TEST(Drm, ConfigRoundTrip) {
    DrmSynthSpec s;
    s.angular_width = 0.3141;
    s.rows = 10;
    const auto back = DrmSynthSpec::from_config(KeyValues::parse(s.to_config().to_text()));
    EXPECT_EQ(synth_drm(back).matrix(), synth_drm(s).matrix());
}

TEST(Noise, NoiselessMeanHitsTarget) {
    PhantomSpec p;
    const auto m = simulate_drc(synth_drm(DrmSynthSpec{}), rasterize_phantom(p), NoiseSpec{10000, 10000, 0, true});
    EXPECT_NEAR(ordered_sum(m.y.data()) / m.y.size(), 10000.0, 1e-9 * 10000.0);
    EXPECT_EQ(m.y, m.clean);
    EXPECT_GT(m.scale, 0.0);
}

TEST(Noise, ResidualStatistics) {
    PhantomSpec p;
    NoiseSpec n;
    n.seed = 3;
    const auto m = simulate_drc(synth_drm(DrmSynthSpec{}), rasterize_phantom(p), n);
    double mean = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < m.y.size(); ++j) {
        const double r = m.y[j] - m.clean[j];
        mean += r;
        sq += r * r;
    }
    mean /= m.y.size();
    // 180 samples of sd 100: the mean stays within 4 standard errors
    EXPECT_LE(std::abs(mean), 4 * 100 / std::sqrt(180.0));
    EXPECT_NEAR(std::sqrt(sq / m.y.size()), 100.0, 20.0);
}

TEST(Noise, SeededAndDeterministic) {
    const ResponseMatrix d = synth_drm(DrmSynthSpec{});
    const Matrix img = rasterize_phantom(PhantomSpec{});
    NoiseSpec a;
    a.seed = 9;
    NoiseSpec b = a;
    b.seed = 10;
    EXPECT_EQ(simulate_drc(d, img, a).y, simulate_drc(d, img, a).y);
    EXPECT_FALSE(simulate_drc(d, img, a).y == simulate_drc(d, img, b).y);
}

TEST(Noise, ZeroImageIsRejected) {
    EXPECT_THROW(simulate_drc(synth_drm(DrmSynthSpec{}), Matrix(75, 180), NoiseSpec{}), ConfigError);
    NoiseSpec bad;
    bad.variance = -1;
    EXPECT_THROW(bad.validate(), ConfigError);
}
