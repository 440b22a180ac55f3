#include "rsm/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "rsm/error.hpp"

namespace rsm {

namespace {

struct PlanPair {
    fftw_plan fwd;
    fftw_plan bwd;
};

// fftw planning is not thread-safe; execution with the new-array interface is.
// FFTW_ESTIMATE keeps the chosen algorithm (and therefore rounding) stable run to run.
PlanPair plans_for(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    auto* a = fftw_alloc_complex(n);
    auto* b = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p{fftw_plan_dft_1d(static_cast<int>(n), a, b, FFTW_FORWARD, flags),
               fftw_plan_dft_1d(static_cast<int>(n), a, b, FFTW_BACKWARD, flags)};
    fftw_free(a);
    fftw_free(b);
    if (!p.fwd || !p.bwd) throw Error("fftw: planning failed for n=" + std::to_string(n));
    cache.emplace(n, p);
    return p;
}

fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

// Plans are out-of-place, so aliased calls go through a per-thread scratch copy.
void execute(void* plan, const cplx* in, cplx* out, std::size_t n) {
    if (in == out) {
        thread_local std::vector<cplx> scratch;
        scratch.assign(in, in + n);
        in = scratch.data();
    }
    fftw_execute_dft(static_cast<fftw_plan>(plan), as_fftw(in), as_fftw(out));
}

}  // namespace

Dft::Dft(std::size_t n) : n_(n) {
    if (n == 0) throw DimensionError("Dft: size must be positive");
    auto p = plans_for(n);
    fwd_ = p.fwd;
    bwd_ = p.bwd;
}

void Dft::forward(std::span<const cplx> in, std::span<cplx> out) const {
    if (in.size() != n_ || out.size() != n_) throw DimensionError("Dft::forward: length mismatch");
    execute(fwd_, in.data(), out.data(), n_);
}

void Dft::forward(std::span<const double> in, std::span<cplx> out) const {
    if (in.size() != n_ || out.size() != n_) throw DimensionError("Dft::forward: length mismatch");
    for (std::size_t j = 0; j < n_; ++j) out[j] = cplx(in[j], 0.0);
    execute(fwd_, out.data(), out.data(), n_);
}

void Dft::inverse(std::span<const cplx> in, std::span<cplx> out) const {
    if (in.size() != n_ || out.size() != n_) throw DimensionError("Dft::inverse: length mismatch");
    execute(bwd_, in.data(), out.data(), n_);
    const double inv = 1.0 / static_cast<double>(n_);
    for (auto& v : out) v *= inv;
}

}  // namespace rsm
