#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "rsm/denoisers.hpp"
#include "rsm/error.hpp"
#include "rsm/forward_model.hpp"
#include "rsm/matrix.hpp"

namespace rsm {

/// Raised when a solver iteration fails; carries the 1-based iteration.
class SolverError : public Error {
public:
    SolverError(int iteration, const std::string& what)
        : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// Hyperparameters shared by the l1+denoiser and l1-only ADMM solvers.
struct AdmmConfig {
    double lambda = 0.36;
    double gamma = 0.23;
    int iterations = 300;
    /// rho1 = rho2 = rho^(k), geometric from rho_start (k=1) to rho_end (k=K).
    double rho_start = 0.05;
    double rho_end = 5.0;
    DenoiserSpec denoiser = DenoiserSpec::tv();
    bool clamp_output = true;
    /// Early exit when max(|b-a|, |c-a|) / |a| drops below this; 0 disables.
    double tolerance = 0.0;

    void validate() const;
    double rho(int k) const;
};

struct MlemConfig {
    int iterations = 300;
    double beta = 0.3;
    int median_radius = 1;
    double epsilon = 1e-12;

    void validate() const;
};

struct IterationRecord {
    int k = 0;
    double rho = 0.0;
    double primal_b = 0.0;  ///< |b - a|_2
    double primal_c = 0.0;  ///< |c - a|_2
    double data_fit = 0.0;  ///< 0.5 |y - Phi a|^2
    double l1 = 0.0;        ///< lambda |a|_1
    double log_likelihood = std::numeric_limits<double>::quiet_NaN();  ///< MLEM only
};

struct SolverTrace {
    std::vector<IterationRecord> records;
    std::string to_csv() const;
};

/// Iterate snapshot passed to observers after each completed iteration.
/// Variables a solver does not carry are null.
struct SolverState {
    int k = 0;
    const Matrix* a = nullptr;
    const Matrix* b = nullptr;
    const Matrix* c = nullptr;
    const Matrix* w1 = nullptr;
    const Matrix* w2 = nullptr;
};
using IterationObserver = std::function<void(const SolverState&)>;

struct SolverResult {
    Matrix image;
    SolverTrace trace;
};

/// Elementwise sign(x) max(|x| - t, 0).
Matrix soft_threshold(const Matrix& x, double t);

/// min 0.5|y - Phi a|^2 + lambda |a|_1 + gamma R(a) with the denoiser standing
/// in for the prox of R, split as a = b (l1) and a = c (denoiser).
SolverResult reconstruct_l1_dnn(const ResponseMatrix& drm, const Signal& y, const AdmmConfig& cfg,
                                const IterationObserver& observer = {});

/// min 0.5|y - Phi a|^2 + lambda |a|_1 with a single split; cfg.gamma and
/// cfg.denoiser are ignored.
SolverResult reconstruct_l1(const ResponseMatrix& drm, const Signal& y, const AdmmConfig& cfg,
                            const IterationObserver& observer = {});

/// Multiplicative ML-EM with a one-step-late median root prior.
SolverResult reconstruct_mlem_mrp(const ResponseMatrix& drm, const Signal& y, const MlemConfig& cfg,
                                  const IterationObserver& observer = {});

}  // namespace rsm
