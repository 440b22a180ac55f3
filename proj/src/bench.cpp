#include "rsm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "rsm/log.hpp"
#include "rsm/tensor_io.hpp"

namespace rsm {

double nrmse(const Matrix& estimate, const Matrix& truth) {
    if (!estimate.same_shape(truth)) throw DimensionError("nrmse: estimate and truth differ in shape");
    const double denom = norm2(truth.data());
    if (!(denom > 0.0)) throw ConfigError("nrmse: truth image is zero");
    double acc = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const double d = estimate.data()[k] - truth.data()[k];
        acc += d * d;
    }
    return std::sqrt(acc) / denom;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::MlemMrp: return "mlem-mrp";
        case Method::L1: return "l1";
        case Method::L1Dnn: return "l1-dnn";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "mlem-mrp") return Method::MlemMrp;
    if (name == "l1") return Method::L1;
    if (name == "l1-dnn") return Method::L1Dnn;
    throw ConfigError("unknown method '" + name + "' (expected l1-dnn, l1 or mlem-mrp)");
}

SolverResult run_solver(const SolverChoice& choice, const ResponseMatrix& drm, const Signal& y) {
    switch (choice.method) {
        case Method::MlemMrp: return reconstruct_mlem_mrp(drm, y, choice.mlem);
        case Method::L1: return reconstruct_l1(drm, y, choice.admm);
        case Method::L1Dnn: return reconstruct_l1_dnn(drm, y, choice.admm);
    }
    throw ConfigError("unknown method");
}

std::optional<double> BenchmarkReport::average(const std::string& solver, const std::string& shape) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : rows) {
        if (r.solver != solver || (!shape.empty() && r.shape != shape) || std::isnan(r.nrmse)) continue;
        sum += r.nrmse;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

std::size_t BenchmarkReport::failures() const {
    std::size_t f = 0;
    for (const auto& r : rows) f += std::isnan(r.nrmse) ? 1 : 0;
    return f;
}

BenchmarkReport run_benchmark(const std::vector<SuiteEntry>& suite, const ResponseMatrix& drm,
                              const std::vector<SolverChoice>& solvers, const NoiseSpec& noise,
                              const BenchmarkOptions& options) {
    BenchmarkReport report;
    for (const auto& s : solvers) report.solvers.push_back(s.name());
    const std::size_t ns = solvers.size();
    const long tasks = static_cast<long>(suite.size() * ns);
    report.rows.resize(static_cast<std::size_t>(tasks));

    // One simulation per phantom, shared by its solver runs.
    std::vector<std::optional<Measurement>> meas(suite.size());
    std::vector<std::string> sim_error(suite.size());
    for (std::size_t p = 0; p < suite.size(); ++p) {
        NoiseSpec ns_p = noise;
        ns_p.seed = noise.seed + static_cast<std::uint64_t>(suite[p].id);
        try {
            meas[p] = simulate_drc(drm, suite[p].image, ns_p);
        } catch (const std::exception& e) {
            sim_error[p] = e.what();
        }
    }

    const int jobs = std::max(1, options.jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (long t = 0; t < tasks; ++t) {
        const std::size_t p = static_cast<std::size_t>(t) / ns;
        const std::size_t s = static_cast<std::size_t>(t) % ns;
        const auto& entry = suite[p];
        BenchmarkRow row;
        row.phantom_id = entry.id;
        row.shape = shape_name(entry.spec.shape);
        row.solver = solvers[s].name();
        row.seed = noise.seed + static_cast<std::uint64_t>(entry.id);
        row.nrmse = std::numeric_limits<double>::quiet_NaN();
        if (!meas[p]) {
            row.error = "simulation failed: " + sim_error[p];
        } else {
            try {
                const auto t0 = std::chrono::steady_clock::now();
                auto result = run_solver(solvers[s], drm, meas[p]->y);
                const auto t1 = std::chrono::steady_clock::now();
                Matrix truth = entry.image;
                for (auto& v : truth.data()) v *= meas[p]->scale;
                row.nrmse = nrmse(result.image, truth);
                if (options.record_timing) row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
        report.rows[static_cast<std::size_t>(t)] = std::move(row);
    }
    std::stable_sort(report.rows.begin(), report.rows.end(), [](const BenchmarkRow& x, const BenchmarkRow& y) {
        return x.phantom_id != y.phantom_id ? x.phantom_id < y.phantom_id : x.solver < y.solver;
    });
    for (const auto& r : report.rows) {
        if (!r.error.empty()) warn("phantom " + std::to_string(r.phantom_id) + " / " + r.solver + ": " + r.error);
    }
    return report;
}

std::string report_to_csv(const BenchmarkReport& report) {
    std::string out = "phantom_id,shape,solver,nrmse,wall_ms,seed\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.phantom_id) + "," + r.shape + "," + r.solver + "," +
               (std::isnan(r.nrmse) ? std::string() : io::format_double(r.nrmse)) + "," + io::format_double(r.wall_ms) +
               "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

BenchmarkReport report_from_csv(const std::string& text) {
    BenchmarkReport report;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
        throw ParseError(ParseError::Kind::Syntax, line_no, "report csv line " + std::to_string(line_no) + ": " + why);
    };
    auto to_double = [&](const std::string& s) {
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad number '" + s + "'");
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "phantom_id,shape,solver,nrmse,wall_ms,seed") fail("unexpected header");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 6) fail("expected 6 fields");
        BenchmarkRow r;
        r.phantom_id = static_cast<int>(to_double(f[0]));
        r.shape = f[1];
        r.solver = f[2];
        r.nrmse = f[3].empty() ? std::numeric_limits<double>::quiet_NaN() : to_double(f[3]);
        r.wall_ms = to_double(f[4]);
        r.seed = std::stoull(f[5]);
        if (std::find(report.solvers.begin(), report.solvers.end(), r.solver) == report.solvers.end()) {
            report.solvers.push_back(r.solver);
        }
        report.rows.push_back(std::move(r));
    }
    return report;
}

std::string report_to_markdown(const BenchmarkReport& report) {
    auto cell = [](std::optional<double> v) {
        if (!v) return std::string("n/a");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *v);
        return std::string(buf);
    };
    std::string out = "| |";
    for (const auto& s : report.solvers) out += " " + s + " |";
    out += "\n|---|";
    for (std::size_t k = 0; k < report.solvers.size(); ++k) out += "---|";
    out += "\n";
    const std::pair<const char*, const char*> shapes[] = {{"Disc", "disc"}, {"Ring", "ring"}, {"Square", "square"}};
    for (const auto& [label, key] : shapes) {
        out += std::string("| ") + label + " |";
        for (const auto& s : report.solvers) out += " " + cell(report.average(s, key)) + " |";
        out += "\n";
    }
    out += "| Average |";
    for (const auto& s : report.solvers) out += " " + cell(report.average(s)) + " |";
    out += "\n";
    return out;
}

void write_report(const BenchmarkReport& report, const std::string& path, ReportFormat format) {
    const std::string text = format == ReportFormat::Csv ? report_to_csv(report) : report_to_markdown(report);
    io::write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace rsm
