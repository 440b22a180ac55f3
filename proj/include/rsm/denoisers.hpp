#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "rsm/matrix.hpp"

namespace rsm {

/// Noise variance handed to a denoiser (gamma / rho2 inside the ADMM loop).
class NoiseLevel {
public:
    explicit NoiseLevel(double variance);
    double variance() const noexcept { return variance_; }
    double sigma() const noexcept;

private:
    double variance_;
};

struct IdentityParams {};

/// Separable Gaussian with standard deviation width_scale * sqrt(variance),
/// in pixels. Taps w_k = exp(-k^2 / (2 s^2)) for |k| <= ceil(4 s), normalized
/// to unit sum; applied along the azimuth (wrapping) and then along the polar
/// axis (edge replicated).
struct GaussianParams {
    double width_scale = 1.0;
};

/// (2r+1)^2 median window with the same boundary rules as the Gaussian.
struct MedianParams {
    int radius = 1;
};

/// Proximal operator of variance * TV(.), isotropic TV, computed by
/// accelerated projected gradient on the dual. Stops after max_iterations or
/// when the duality gap falls below tolerance * weight * TV(input).
///
/// With peak_relative set the weight becomes variance * max|input|, i.e. the
/// prox is taken on the image divided by its peak magnitude and scaled back,
/// so the noise variance is read in unit-peak intensity units.
struct TvParams {
    int max_iterations = 50;
    double tolerance = 1e-5;
    bool peak_relative = false;
};

/// Out-of-process denoiser speaking the stdio bridge protocol.
struct ExternalParams {
    std::string executable;
    std::vector<std::string> args;
    double timeout_seconds = 60.0;
};

struct DenoiserSpec {
    std::variant<IdentityParams, GaussianParams, MedianParams, TvParams, ExternalParams> params;

    std::string kind_name() const;
    /// Throws ConfigError when the parameters are invalid for the kind.
    void validate() const;

    static DenoiserSpec identity() { return {IdentityParams{}}; }
    static DenoiserSpec gaussian(double width_scale = 1.0) { return {GaussianParams{width_scale}}; }
    static DenoiserSpec median(int radius = 1) { return {MedianParams{radius}}; }
    static DenoiserSpec tv(int max_iterations = 50, double tolerance = 1e-5, bool peak_relative = false) {
        return {TvParams{max_iterations, tolerance, peak_relative}};
    }
    static DenoiserSpec external(std::string executable, std::vector<std::string> args = {},
                                 double timeout_seconds = 60.0) {
        return {ExternalParams{std::move(executable), std::move(args), timeout_seconds}};
    }
    /// Default-parameter spec for "identity", "gaussian", "median" or "tv".
    static DenoiserSpec from_name(const std::string& name);
};

/// A denoiser instance. External denoisers own their server process for the
/// lifetime of the object, so one instance should serve a whole solver run.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual Matrix apply(const Matrix& image, NoiseLevel level) = 0;
};

std::unique_ptr<Denoiser> make_denoiser(const DenoiserSpec& spec);

/// One-shot convenience; spawns and shuts down a server for external specs.
Matrix denoise(const DenoiserSpec& spec, const Matrix& image, NoiseLevel level);

Matrix gaussian_blur(const Matrix& image, double sigma_pixels);
std::vector<double> gaussian_taps(double sigma_pixels);
Matrix median_filter(const Matrix& image, int radius);

struct TvResult {
    Matrix image;
    int iterations = 0;
    double gap = 0.0;
};
TvResult tv_prox(const Matrix& image, double weight, const TvParams& params);

/// Isotropic TV with the library's boundary rules (wrap in azimuth, Neumann in polar).
double total_variation(const Matrix& image);

}  // namespace rsm
