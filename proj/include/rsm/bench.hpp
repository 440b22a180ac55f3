#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsm/forward_model.hpp"
#include "rsm/phantoms.hpp"
#include "rsm/solvers.hpp"

namespace rsm {

/// |estimate - truth|_2 / |truth|_2.
double nrmse(const Matrix& estimate, const Matrix& truth);

enum class Method { MlemMrp, L1, L1Dnn };
std::string method_name(Method m);
Method parse_method(const std::string& name);

/// One solver column of the benchmark table.
struct SolverChoice {
    Method method = Method::L1Dnn;
    AdmmConfig admm;
    MlemConfig mlem;

    std::string name() const { return method_name(method); }
};

/// Runs the chosen solver on a measurement.
SolverResult run_solver(const SolverChoice& choice, const ResponseMatrix& drm, const Signal& y);

struct BenchmarkRow {
    int phantom_id = 0;
    std::string shape;
    std::string solver;
    double nrmse = 0.0;   ///< NaN when the run failed
    double wall_ms = 0.0;
    std::uint64_t seed = 0;
    std::string error;    ///< empty on success; not serialized
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;  ///< ordered by (phantom id, solver name)
    /// Column order for tables; as configured.
    std::vector<std::string> solvers;

    /// Mean NRMSE of successful rows for one solver, optionally one shape.
    std::optional<double> average(const std::string& solver, const std::string& shape = {}) const;
    std::size_t failures() const;
};

struct BenchmarkOptions {
    int jobs = 1;
    /// Wall times are left at 0 unless enabled so repeated runs are byte-identical.
    bool record_timing = false;
};

/// Simulates each phantom with seed noise.seed + phantom id, runs every solver,
/// and scores against the phantom scaled by the simulation's scale factor.
BenchmarkReport run_benchmark(const std::vector<SuiteEntry>& suite, const ResponseMatrix& drm,
                              const std::vector<SolverChoice>& solvers, const NoiseSpec& noise,
                              const BenchmarkOptions& options = {});

/// CSV columns: phantom_id,shape,solver,nrmse,wall_ms,seed (17 significant digits).
std::string report_to_csv(const BenchmarkReport& report);
BenchmarkReport report_from_csv(const std::string& text);
/// Shapes as rows (Disc, Ring, Square, Average), solvers as columns.
std::string report_to_markdown(const BenchmarkReport& report);

enum class ReportFormat { Csv, Markdown };
void write_report(const BenchmarkReport& report, const std::string& path, ReportFormat format);

}  // namespace rsm
