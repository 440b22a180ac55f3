#include "rsm/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rsm/error.hpp"
#include "rsm/rng.hpp"

namespace rsm {

using std::numbers::pi;

double pixel_theta(std::size_t i, std::size_t m) { return pi * (static_cast<double>(i) + 0.5) / static_cast<double>(m); }
double pixel_phi(std::size_t j, std::size_t n) { return 2.0 * pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n); }

std::array<double, 3> direction(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

namespace {

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Angle between unit vectors; atan2 form stays accurate for small angles.
double angle_between(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const std::array<double, 3> c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    return std::atan2(std::sqrt(dot3(c, c)), dot3(a, b));
}

double polar_extent(const PhantomSpec& s) {
    switch (s.shape) {
        case Shape::Disc: return s.radius;
        case Shape::Ring: return s.radius + 0.5 * s.thickness;
        case Shape::Square: return std::atan(std::sqrt(2.0) * std::tan(s.half_width));
    }
    return 0.0;
}

}  // namespace

double angular_distance(double theta1, double phi1, double theta2, double phi2) {
    return angle_between(direction(theta1, phi1), direction(theta2, phi2));
}

std::string shape_name(Shape s) {
    switch (s) {
        case Shape::Disc: return "disc";
        case Shape::Ring: return "ring";
        case Shape::Square: return "square";
    }
    return "?";
}

Shape parse_shape(const std::string& name) {
    if (name == "disc") return Shape::Disc;
    if (name == "ring") return Shape::Ring;
    if (name == "square") return Shape::Square;
    throw ConfigError("unknown shape '" + name + "' (expected disc, ring or square)");
}

void PhantomSpec::validate() const {
    if (rows < 1 || cols < 2) throw ConfigError("phantom grid must be at least 1x2");
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw ConfigError("phantom amplitude must be positive");
    if (!(theta0 > 0.0 && theta0 < pi)) throw ConfigError("phantom centre theta must lie in (0, pi)");
    if (!std::isfinite(phi0)) throw ConfigError("phantom centre phi must be finite");
    switch (shape) {
        case Shape::Disc:
            if (!(radius > 0.0)) throw ConfigError("disc radius must be > 0");
            break;
        case Shape::Ring:
            if (!(radius > 0.0)) throw ConfigError("ring radius must be > 0");
            if (!(thickness >= 0.0 && thickness < radius)) throw ConfigError("ring thickness must be in [0, radius)");
            break;
        case Shape::Square:
            if (!(half_width > 0.0 && half_width < pi / 2)) throw ConfigError("square half-width must be in (0, pi/2)");
            break;
    }
    const double ext = polar_extent(*this);
    if (theta0 - ext <= 0.0 || theta0 + ext >= pi) {
        throw ConfigError(shape_name(shape) + " at theta=" + std::to_string(theta0) + " with angular extent " +
                          std::to_string(ext) + " leaves the polar range (0, pi)");
    }
}

KeyValues PhantomSpec::to_config() const {
    KeyValues kv;
    kv.set("shape", shape_name(shape));
    kv.set("theta0", theta0);
    kv.set("phi0", phi0);
    kv.set("radius", radius);
    kv.set("thickness", thickness);
    kv.set("half_width", half_width);
    kv.set("amplitude", amplitude);
    kv.set("rows", static_cast<long long>(rows));
    kv.set("cols", static_cast<long long>(cols));
    return kv;
}

PhantomSpec PhantomSpec::from_config(const KeyValues& kv) {
    PhantomSpec s;
    s.shape = parse_shape(kv.get_or("shape", "disc"));
    s.theta0 = kv.get_double_or("theta0", s.theta0);
    s.phi0 = kv.get_double_or("phi0", s.phi0);
    s.radius = kv.get_double_or("radius", s.radius);
    s.thickness = kv.get_double_or("thickness", s.thickness);
    s.half_width = kv.get_double_or("half_width", s.half_width);
    s.amplitude = kv.get_double_or("amplitude", s.amplitude);
    s.rows = static_cast<std::size_t>(kv.get_int_or("rows", static_cast<long long>(s.rows)));
    s.cols = static_cast<std::size_t>(kv.get_int_or("cols", static_cast<long long>(s.cols)));
    return s;
}

Matrix rasterize_phantom(const PhantomSpec& spec) {
    spec.validate();
    const auto centre = direction(spec.theta0, spec.phi0);
    const std::array<double, 3> e_theta{std::cos(spec.theta0) * std::cos(spec.phi0),
                                        std::cos(spec.theta0) * std::sin(spec.phi0), -std::sin(spec.theta0)};
    const std::array<double, 3> e_phi{-std::sin(spec.phi0), std::cos(spec.phi0), 0.0};

    Matrix img(spec.rows, spec.cols);
    for (std::size_t i = 0; i < spec.rows; ++i) {
        for (std::size_t j = 0; j < spec.cols; ++j) {
            const auto v = direction(pixel_theta(i, spec.rows), pixel_phi(j, spec.cols));
            bool inside = false;
            switch (spec.shape) {
                case Shape::Disc:
                    inside = angle_between(v, centre) <= spec.radius;
                    break;
                case Shape::Ring:
                    inside = std::abs(angle_between(v, centre) - spec.radius) <= 0.5 * spec.thickness;
                    break;
                case Shape::Square: {
                    const double z = dot3(v, centre);
                    inside = z > 0.0 && std::abs(std::atan2(dot3(v, e_phi), z)) <= spec.half_width &&
                             std::abs(std::atan2(dot3(v, e_theta), z)) <= spec.half_width;
                    break;
                }
            }
            if (inside) img(i, j) = spec.amplitude;
        }
    }
    return img;
}

std::vector<SuiteEntry> make_test_suite(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (rows < 8 || cols < 16) throw ConfigError("test suite needs at least an 8x16 grid");
    Rng rng(seed);
    std::vector<SuiteEntry> suite;
    const std::array<std::pair<Shape, int>, 3> plan{{{Shape::Disc, 6}, {Shape::Ring, 6}, {Shape::Square, 8}}};
    // Smallest feature size: about two pixels along the polar axis.
    const double pix = pi / static_cast<double>(rows);
    int id = 0;
    for (const auto& [shape, count] : plan) {
        for (int c = 0; c < count; ++c) {
            while (true) {
                PhantomSpec s;
                s.shape = shape;
                s.rows = rows;
                s.cols = cols;
                s.phi0 = rng.uniform(0.0, 2.0 * pi);
                s.amplitude = 1.0;
                switch (shape) {
                    case Shape::Disc:
                        s.radius = rng.uniform(0.10, 0.30);
                        break;
                    case Shape::Ring:
                        s.radius = rng.uniform(0.20, 0.40);
                        s.thickness = std::max(2.0 * pix, rng.uniform(0.06, 0.12));
                        // coarse grids: keep a hole inside the ring
                        s.radius = std::max(s.radius, 1.5 * s.thickness);
                        break;
                    case Shape::Square:
                        s.half_width = rng.uniform(0.10, 0.25);
                        break;
                }
                const double ext = polar_extent(s);
                s.theta0 = rng.uniform(ext + 0.1, pi - ext - 0.1);
                auto img = rasterize_phantom(s);
                if (max_abs(img.data()) > 0.0) {
                    suite.push_back({id++, s, std::move(img)});
                    break;
                }
            }
        }
    }
    return suite;
}

void DrmSynthSpec::validate() const {
    if (rows < 1 || cols < 2) throw ConfigError("DRM must be at least 1x2");
    if (!(baseline >= 0.0) || !std::isfinite(baseline)) throw ConfigError("DRM baseline must be >= 0");
    if (!(peak_amplitude >= 0.0) || !std::isfinite(peak_amplitude)) throw ConfigError("DRM peak amplitude must be >= 0");
    if (!(angular_width > 0.0)) throw ConfigError("DRM angular width must be > 0");
}

KeyValues DrmSynthSpec::to_config() const {
    KeyValues kv;
    kv.set("rows", static_cast<long long>(rows));
    kv.set("cols", static_cast<long long>(cols));
    kv.set("baseline", baseline);
    kv.set("peak_amplitude", peak_amplitude);
    kv.set("angular_width", angular_width);
    kv.set("seed", static_cast<long long>(seed));
    return kv;
}

DrmSynthSpec DrmSynthSpec::from_config(const KeyValues& kv) {
    DrmSynthSpec s;
    s.rows = static_cast<std::size_t>(kv.get_int_or("rows", static_cast<long long>(s.rows)));
    s.cols = static_cast<std::size_t>(kv.get_int_or("cols", static_cast<long long>(s.cols)));
    s.baseline = kv.get_double_or("baseline", s.baseline);
    s.peak_amplitude = kv.get_double_or("peak_amplitude", s.peak_amplitude);
    s.angular_width = kv.get_double_or("angular_width", s.angular_width);
    s.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 0));
    return s;
}

ResponseMatrix synth_drm(const DrmSynthSpec& spec) {
    spec.validate();
    Matrix d(spec.rows, spec.cols);
    const double two_w2 = 2.0 * spec.angular_width * spec.angular_width;
    for (std::size_t i = 0; i < spec.rows; ++i) {
        const double theta = pixel_theta(i, spec.rows);
        const double phi_ref = pixel_phi(0, spec.cols);
        for (std::size_t j = 0; j < spec.cols; ++j) {
            const double delta = angular_distance(theta, pixel_phi(j, spec.cols), theta, phi_ref);
            d(i, j) = spec.baseline + spec.peak_amplitude * std::exp(-delta * delta / two_w2);
        }
    }
    return ResponseMatrix(std::move(d));
}

void NoiseSpec::validate() const {
    if (!(target_mean_counts > 0.0) || !std::isfinite(target_mean_counts)) {
        throw ConfigError("target mean counts must be positive");
    }
    if (!(variance >= 0.0) || !std::isfinite(variance)) throw ConfigError("noise variance must be >= 0");
}

Measurement simulate_drc(const ResponseMatrix& drm, const Matrix& image, const NoiseSpec& noise) {
    noise.validate();
    const auto unit = apply_forward(drm, image);
    const double mean_unit = ordered_sum(unit.data()) / static_cast<double>(unit.size());
    if (!(mean_unit > 0.0)) {
        throw ConfigError("simulate_drc: image produces no signal (mean of Phi a is " + std::to_string(mean_unit) +
                          "), cannot scale to target counts");
    }
    const double scale = noise.target_mean_counts / mean_unit;
    Matrix scaled = image;
    for (auto& v : scaled.data()) v *= scale;
    auto clean = apply_forward(drm, scaled);
    Signal y = clean;
    if (!noise.noiseless) {
        Rng rng(noise.seed);
        const double sd = std::sqrt(noise.variance);
        for (std::size_t j = 0; j < y.size(); ++j) y[j] += sd * rng.normal();
    }
    return {std::move(y), std::move(clean), scale};
}

}  // namespace rsm
