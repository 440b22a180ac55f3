#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rsm/config.hpp"
#include "rsm/forward_model.hpp"
#include "rsm/matrix.hpp"

namespace rsm {

// Grid geometry: pixel (i, j) of an m x n image looks along polar angle
// theta_i = pi (i + 0.5) / m and azimuth phi_j = 2 pi (j + 0.5) / n.
double pixel_theta(std::size_t i, std::size_t m);
double pixel_phi(std::size_t j, std::size_t n);
std::array<double, 3> direction(double theta, double phi);
/// Great-circle angle between two directions, radians.
double angular_distance(double theta1, double phi1, double theta2, double phi2);

enum class Shape { Disc, Ring, Square };
std::string shape_name(Shape s);
Shape parse_shape(const std::string& name);

struct PhantomSpec {
    Shape shape = Shape::Disc;
    double theta0 = 1.5707963267948966;
    double phi0 = 3.141592653589793;
    double radius = 0.2;
    double thickness = 0.08;  // ring only
    double half_width = 0.15; // square only
    double amplitude = 1.0;
    std::size_t rows = 75;
    std::size_t cols = 180;

    /// Throws ConfigError for invalid sizes or a shape leaving theta in (0, pi).
    void validate() const;
    KeyValues to_config() const;
    static PhantomSpec from_config(const KeyValues& kv);
};

/// Disc: angle to centre <= radius. Ring: |angle - radius| <= thickness/2.
/// Square: both tangent-plane angles at the centre (along e_theta and e_phi)
/// within half_width, front hemisphere only.
Matrix rasterize_phantom(const PhantomSpec& spec);

struct SuiteEntry {
    int id = 0;
    PhantomSpec spec;
    Matrix image;
};

/// 6 discs, 6 rings and 8 squares with seeded centres and sizes, ids 0..19.
std::vector<SuiteEntry> make_test_suite(std::size_t rows, std::size_t cols, std::uint64_t seed);

struct DrmSynthSpec {
    std::size_t rows = 75;
    std::size_t cols = 180;
    double baseline = 0.01;
    double peak_amplitude = 1.0;
    double angular_width = 0.25;
    /// Recorded for provenance; the closed form has no random component.
    std::uint64_t seed = 0;

    void validate() const;
    KeyValues to_config() const;
    static DrmSynthSpec from_config(const KeyValues& kv);
};

/// D[i,j] = baseline + peak * exp(-delta^2 / (2 w^2)), delta the great-circle
/// angle between pixel (i, j) and pixel (i, 0).
ResponseMatrix synth_drm(const DrmSynthSpec& spec);

struct NoiseSpec {
    double target_mean_counts = 10000.0;
    double variance = 10000.0;
    std::uint64_t seed = 0;
    bool noiseless = false;

    void validate() const;
};

struct Measurement {
    Signal y;      ///< noisy counts
    Signal clean;  ///< Phi(scale * image)
    double scale;  ///< factor applied to the image so mean(clean) == target
};

Measurement simulate_drc(const ResponseMatrix& drm, const Matrix& image, const NoiseSpec& noise);

}  // namespace rsm
