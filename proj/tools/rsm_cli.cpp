// rsm: phantom generation, DRM synthesis, simulation, reconstruction and benchmarking.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsm/bench.hpp"
#include "rsm/error.hpp"
#include "rsm/log.hpp"
#include "rsm/phantoms.hpp"
#include "rsm/solvers.hpp"
#include "rsm/tensor_io.hpp"

#ifndef RSM_VERSION
#define RSM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace rsm;

namespace {

// Runtime failures (exit 1) vs usage errors (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string stem_path(const std::string& out) {
    fs::path p(out);
    return (p.parent_path() / p.stem()).string();
}

KeyValues manifest_base(const std::string& command) {
    KeyValues kv;
    kv.set("command", command);
    kv.set("tool_version", std::string(RSM_VERSION));
    return kv;
}

void write_manifest(const KeyValues& kv, const std::string& path) {
    kv.save(path);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

// ---- phantom ----------------------------------------------------------------

struct PhantomArgs {
    std::string shape = "disc";
    std::size_t m = 75, n = 180;
    std::string out;
    bool suite = false;
    std::uint64_t seed = 7;
    std::string config;
    double theta0 = 1.5707963267948966, phi0 = 3.141592653589793;
    double radius = 0.2, thickness = 0.08, half_width = 0.15, amplitude = 1.0;
};

void add_phantom(CLI::App& app, PhantomArgs& a) {
    auto* c = app.add_subcommand("phantom", "Rasterize a disc/ring/square phantom, or the 20-phantom suite");
    c->add_option("--shape", a.shape, "disc, ring or square")->check(CLI::IsMember({"disc", "ring", "square"}));
    c->add_option("--m", a.m, "grid rows (polar)")->check(CLI::PositiveNumber);
    c->add_option("--n", a.n, "grid columns (azimuth)")->check(CLI::PositiveNumber);
    c->add_option("--out", a.out, "output file, or directory with --suite")->required();
    c->add_flag("--suite", a.suite, "write all 20 suite phantoms into --out");
    c->add_option("--seed", a.seed, "suite seed");
    c->add_option("--config", a.config, "key=value phantom spec; flags given explicitly override it");
    c->add_option("--theta0", a.theta0, "centre polar angle (rad)");
    c->add_option("--phi0", a.phi0, "centre azimuth (rad)");
    c->add_option("--radius", a.radius, "disc/ring angular radius (rad)");
    c->add_option("--thickness", a.thickness, "ring thickness (rad)");
    c->add_option("--half-width", a.half_width, "square half-width (rad)");
    c->add_option("--amplitude", a.amplitude, "intensity inside the shape");
}

int run_phantom(const CLI::App& cmd, const PhantomArgs& a) {
    if (a.suite) {
        fs::create_directories(a.out);
        const auto suite = make_test_suite(a.m, a.n, a.seed);
        KeyValues kv = manifest_base("phantom --suite");
        kv.set("rows", static_cast<long long>(a.m));
        kv.set("cols", static_cast<long long>(a.n));
        kv.set("seed", std::to_string(a.seed));
        kv.set("out", a.out);
        for (const auto& e : suite) {
            char name[32];
            std::snprintf(name, sizeof name, "phantom_%02d.rsm", e.id);
            io::write_matrix(e.image, (fs::path(a.out) / name).string());
            const KeyValues cfg = e.spec.to_config();
            for (const auto& [k, v] : cfg.entries()) kv.set("phantom_" + std::to_string(e.id) + "." + k, v);
        }
        write_manifest(kv, (fs::path(a.out) / "manifest.txt").string());
        std::cout << "wrote " << suite.size() << " phantoms to " << a.out << "\n";
        return 0;
    }

    PhantomSpec spec;
    if (!a.config.empty()) spec = PhantomSpec::from_config(KeyValues::load(a.config));
    auto given = [&](const char* flag) { return cmd.count(flag) > 0 || a.config.empty(); };
    if (given("--shape")) spec.shape = parse_shape(a.shape);
    if (given("--m")) spec.rows = a.m;
    if (given("--n")) spec.cols = a.n;
    if (given("--theta0")) spec.theta0 = a.theta0;
    if (given("--phi0")) spec.phi0 = a.phi0;
    if (given("--radius")) spec.radius = a.radius;
    if (given("--thickness")) spec.thickness = a.thickness;
    if (given("--half-width")) spec.half_width = a.half_width;
    if (given("--amplitude")) spec.amplitude = a.amplitude;
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    const Matrix img = rasterize_phantom(spec);
    io::write_matrix(img, a.out);
    KeyValues kv = manifest_base("phantom");
    const KeyValues cfg = spec.to_config();
    for (const auto& [k, v] : cfg.entries()) kv.set(k, v);
    kv.set("out", a.out);
    write_manifest(kv, stem_path(a.out) + ".manifest");
    return 0;
}

// ---- synth-drm ---------------------------------------------------------------

struct DrmArgs {
    std::size_t m = 75, n = 180;
    double baseline = DrmSynthSpec{}.baseline;
    double peak = DrmSynthSpec{}.peak_amplitude;
    double width = DrmSynthSpec{}.angular_width;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

void add_drm_flags(CLI::App* c, DrmArgs& a) {
    c->add_option("--m", a.m, "DRM rows")->check(CLI::PositiveNumber);
    c->add_option("--n", a.n, "DRM columns")->check(CLI::PositiveNumber);
    c->add_option("--baseline", a.baseline, "constant response floor");
    c->add_option("--peak", a.peak, "directional peak amplitude");
    c->add_option("--width", a.width, "angular width of the peak (rad)");
}

DrmSynthSpec drm_spec_from(const CLI::App& cmd, const DrmArgs& a) {
    DrmSynthSpec s;
    if (!a.config.empty()) s = DrmSynthSpec::from_config(KeyValues::load(a.config));
    auto given = [&](const char* flag) { return cmd.count(flag) > 0 || a.config.empty(); };
    if (given("--m")) s.rows = a.m;
    if (given("--n")) s.cols = a.n;
    if (given("--baseline")) s.baseline = a.baseline;
    if (given("--peak")) s.peak_amplitude = a.peak;
    if (given("--width")) s.angular_width = a.width;
    if (given("--seed")) s.seed = a.seed;
    try {
        s.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return s;
}

void add_synth_drm(CLI::App& app, DrmArgs& a) {
    auto* c = app.add_subcommand("synth-drm", "Write a synthetic detector response matrix");
    add_drm_flags(c, a);
    c->add_option("--seed", a.seed, "recorded in the manifest");
    c->add_option("--config", a.config, "key=value DRM spec; explicit flags override it");
    c->add_option("--out", a.out, "output matrix file")->required();
}

int run_synth_drm(const CLI::App& cmd, const DrmArgs& a) {
    const auto spec = drm_spec_from(cmd, a);
    io::write_matrix(synth_drm(spec).matrix(), a.out);
    KeyValues kv = manifest_base("synth-drm");
    const KeyValues cfg = spec.to_config();
    for (const auto& [k, v] : cfg.entries()) kv.set(k, v);
    kv.set("out", a.out);
    write_manifest(kv, stem_path(a.out) + ".manifest");
    return 0;
}

// ---- simulate ----------------------------------------------------------------

struct SimArgs {
    std::string drm, image, out, truth_out;
    double target = 10000.0, variance = 10000.0;
    std::uint64_t seed = 7;
    bool noiseless = false;
};

void add_simulate(CLI::App& app, SimArgs& a) {
    auto* c = app.add_subcommand("simulate", "Simulate a noisy detector response curve y = Phi(scale*image) + noise");
    c->add_option("--drm", a.drm, "DRM matrix file")->required();
    c->add_option("--image", a.image, "phantom image file")->required();
    c->add_option("--out", a.out, "DRC output (1 x n matrix)")->required();
    c->add_option("--truth-out", a.truth_out, "also write the scaled truth image here");
    c->add_option("--target-mean", a.target, "mean counts of the noiseless curve");
    c->add_option("--variance", a.variance, "Gaussian noise variance");
    c->add_option("--seed", a.seed, "noise seed");
    c->add_flag("--noiseless", a.noiseless, "skip the noise");
}

int run_simulate(const SimArgs& a) {
    const ResponseMatrix drm(io::read_matrix(a.drm));
    const Matrix image = io::read_matrix(a.image);
    NoiseSpec noise;
    noise.target_mean_counts = a.target;
    noise.variance = a.variance;
    noise.seed = a.seed;
    noise.noiseless = a.noiseless;
    const auto meas = simulate_drc(drm, image, noise);
    io::write_matrix(meas.y.as_row_matrix(), a.out);
    if (!a.truth_out.empty()) {
        Matrix truth = image;
        for (auto& v : truth.data()) v *= meas.scale;
        io::write_matrix(truth, a.truth_out);
    }
    KeyValues kv = manifest_base("simulate");
    kv.set("drm", a.drm);
    kv.set("image", a.image);
    kv.set("out", a.out);
    if (!a.truth_out.empty()) kv.set("truth_out", a.truth_out);
    kv.set("target_mean_counts", a.target);
    kv.set("variance", a.variance);
    kv.set("seed", std::to_string(a.seed));
    kv.set("noiseless", std::string(a.noiseless ? "true" : "false"));
    kv.set("scale", meas.scale);
    write_manifest(kv, stem_path(a.out) + ".manifest");
    std::cout << "scale " << io::format_double(meas.scale) << "\n";
    return 0;
}

// ---- solver flags shared by reconstruct and bench ---------------------------

struct SolverArgs {
    double lambda = 0.36, gamma = 0.23;
    int iters = 300;
    double rho_start = AdmmConfig{}.rho_start, rho_end = AdmmConfig{}.rho_end;
    std::string denoiser = "tv";
    std::string denoiser_cmd;
    double denoiser_timeout = 60.0;
    std::string tv_scale = "absolute";
    int tv_iters = 50;
    double gaussian_width = 1.0;
    int median_radius = 1;
    double beta = 0.3;
    int mlem_radius = 1;
    int mlem_iters = 300;
};

void add_solver_flags(CLI::App* c, SolverArgs& a) {
    c->add_option("--lambda", a.lambda, "l1 weight");
    c->add_option("--gamma", a.gamma, "denoiser weight");
    c->add_option("--iters", a.iters, "ADMM / MLEM iterations")->check(CLI::PositiveNumber);
    c->add_option("--rho-start", a.rho_start, "first penalty of the geometric schedule");
    c->add_option("--rho-end", a.rho_end, "last penalty of the geometric schedule");
    c->add_option("--denoiser", a.denoiser, "identity, gaussian, median, tv or external")
        ->check(CLI::IsMember({"identity", "gaussian", "median", "tv", "external"}));
    c->add_option("--denoiser-cmd", a.denoiser_cmd, "external denoiser command line")->envname("RSM_DENOISER_CMD");
    c->add_option("--denoiser-timeout", a.denoiser_timeout, "seconds per external request");
    c->add_option("--tv-scale", a.tv_scale, "tv weight in absolute units or relative to the image peak")
        ->check(CLI::IsMember({"absolute", "peak"}));
    c->add_option("--tv-iters", a.tv_iters, "inner tv iterations")->check(CLI::PositiveNumber);
    c->add_option("--gaussian-width", a.gaussian_width, "gaussian width scale");
    c->add_option("--median-radius", a.median_radius, "median denoiser radius")->check(CLI::PositiveNumber);
    c->add_option("--beta", a.beta, "MLEM median root prior strength");
    c->add_option("--mrp-radius", a.mlem_radius, "MLEM median window radius")->check(CLI::PositiveNumber);
}

DenoiserSpec denoiser_from(const SolverArgs& a) {
    if (a.denoiser == "external") {
        const auto words = split_words(a.denoiser_cmd);
        if (words.empty()) throw UsageError("--denoiser external needs --denoiser-cmd or RSM_DENOISER_CMD");
        return DenoiserSpec::external(words.front(), {words.begin() + 1, words.end()}, a.denoiser_timeout);
    }
    if (a.denoiser == "tv") return DenoiserSpec::tv(a.tv_iters, 1e-5, a.tv_scale == "peak");
    if (a.denoiser == "gaussian") return DenoiserSpec::gaussian(a.gaussian_width);
    if (a.denoiser == "median") return DenoiserSpec::median(a.median_radius);
    return DenoiserSpec::identity();
}

SolverChoice choice_from(Method method, const SolverArgs& a) {
    SolverChoice c;
    c.method = method;
    c.admm.lambda = a.lambda;
    c.admm.gamma = a.gamma;
    c.admm.iterations = a.iters;
    c.admm.rho_start = a.rho_start;
    c.admm.rho_end = a.rho_end;
    c.admm.denoiser = denoiser_from(a);
    c.mlem.iterations = a.iters;
    c.mlem.beta = a.beta;
    c.mlem.median_radius = a.mlem_radius;
    try {
        c.admm.validate();
        c.mlem.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return c;
}

void record_solver(KeyValues& kv, const SolverArgs& a) {
    kv.set("lambda", a.lambda);
    kv.set("gamma", a.gamma);
    kv.set("iters", static_cast<long long>(a.iters));
    kv.set("rho_start", a.rho_start);
    kv.set("rho_end", a.rho_end);
    kv.set("denoiser", a.denoiser);
    if (a.denoiser == "external") {
        kv.set("denoiser_cmd", a.denoiser_cmd);
        kv.set("denoiser_timeout", a.denoiser_timeout);
    }
    kv.set("tv_scale", a.tv_scale);
    kv.set("tv_iters", static_cast<long long>(a.tv_iters));
    kv.set("gaussian_width", a.gaussian_width);
    kv.set("median_radius", static_cast<long long>(a.median_radius));
    kv.set("beta", a.beta);
    kv.set("mrp_radius", static_cast<long long>(a.mlem_radius));
}

// ---- reconstruct ---------------------------------------------------------------

struct ReconArgs {
    std::string method = "l1-dnn";
    std::string drm, drc, out, truth;
    SolverArgs solver;
};

void add_reconstruct(CLI::App& app, ReconArgs& a) {
    auto* c = app.add_subcommand("reconstruct", "Reconstruct an image from a DRC");
    c->add_option("--method", a.method, "l1-dnn, l1 or mlem-mrp")->check(CLI::IsMember({"l1-dnn", "l1", "mlem-mrp"}));
    c->add_option("--drm", a.drm, "DRM matrix file")->required();
    c->add_option("--drc", a.drc, "measured curve (1 x n or n x 1)")->required();
    c->add_option("--out", a.out, "reconstruction output")->required();
    c->add_option("--truth", a.truth, "scaled truth; NRMSE goes to stdout and the manifest");
    add_solver_flags(c, a.solver);
}

int run_reconstruct(const ReconArgs& a) {
    const auto choice = choice_from(parse_method(a.method), a.solver);
    const ResponseMatrix drm(io::read_matrix(a.drm));
    const Signal y = Signal::from_matrix(io::read_matrix(a.drc));
    SolverResult res = [&] {
        try {
            return run_solver(choice, drm, y);
        } catch (const DimensionError& e) {
            throw UsageError(e.what());
        }
    }();
    const std::string stem = stem_path(a.out);
    io::write_matrix(res.image, a.out);
    io::export_grayscale(res.image, stem + ".pgm");
    const std::string trace = res.trace.to_csv();
    io::write_file_bytes(stem + ".trace.csv",
                         std::span(reinterpret_cast<const std::uint8_t*>(trace.data()), trace.size()));

    KeyValues kv = manifest_base("reconstruct");
    kv.set("method", a.method);
    kv.set("drm", a.drm);
    kv.set("drc", a.drc);
    kv.set("out", a.out);
    kv.set("pgm", stem + ".pgm");
    kv.set("trace", stem + ".trace.csv");
    record_solver(kv, a.solver);
    if (!a.truth.empty()) {
        const double e = nrmse(res.image, io::read_matrix(a.truth));
        kv.set("truth", a.truth);
        kv.set("nrmse", e);
        std::cout << "nrmse " << io::format_double(e) << "\n";
    }
    write_manifest(kv, stem + ".manifest");
    return 0;
}

// ---- bench -------------------------------------------------------------------

struct BenchArgs {
    std::uint64_t seed = 7;
    std::string out = "report.csv";
    std::string solvers = "mlem-mrp,l1,l1-dnn";
    int jobs = 1;
    bool timing = false;
    std::string drm;
    DrmArgs synth;
    SolverArgs solver;
};

void add_bench(CLI::App& app, BenchArgs& a) {
    auto* c = app.add_subcommand("bench", "Run every solver on the seeded 20-phantom suite");
    c->add_option("--seed", a.seed, "suite and noise seed");
    c->add_option("--out", a.out, "CSV report; markdown goes next to it with a .md extension");
    c->add_option("--solvers", a.solvers, "comma-separated subset of mlem-mrp,l1,l1-dnn");
    c->add_option("--jobs", a.jobs, "worker threads")->check(CLI::PositiveNumber);
    c->add_flag("--timing", a.timing, "record wall times (the CSV is then no longer byte-reproducible)");
    c->add_option("--drm", a.drm, "DRM file instead of the synthetic one");
    add_drm_flags(c, a.synth);
    add_solver_flags(c, a.solver);
}

int run_bench(const CLI::App& cmd, const BenchArgs& a) {
    std::vector<SolverChoice> choices;
    for (const auto& name : split(a.solvers, ',')) {
        try {
            choices.push_back(choice_from(parse_method(name), a.solver));
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
    }
    if (choices.empty()) throw UsageError("--solvers is empty");

    const DrmSynthSpec dspec = drm_spec_from(cmd, a.synth);
    const ResponseMatrix drm = a.drm.empty() ? synth_drm(dspec) : ResponseMatrix(io::read_matrix(a.drm));
    const auto suite = make_test_suite(drm.rows(), drm.cols(), a.seed);
    NoiseSpec noise;
    noise.seed = a.seed;

    std::size_t warnings = 0;
    set_warning_sink([&warnings](const std::string& msg) {
        ++warnings;
        std::cerr << "warning: " << msg << "\n";
    });
    BenchmarkOptions opt;
    opt.jobs = a.jobs;
    opt.record_timing = a.timing;
    const auto report = run_benchmark(suite, drm, choices, noise, opt);
    set_warning_sink(nullptr);

    const std::string md = stem_path(a.out) + ".md";
    write_report(report, a.out, ReportFormat::Csv);
    write_report(report, md, ReportFormat::Markdown);

    KeyValues kv = manifest_base("bench");
    kv.set("seed", std::to_string(a.seed));
    kv.set("solvers", a.solvers);
    kv.set("jobs", static_cast<long long>(a.jobs));
    kv.set("timing", std::string(a.timing ? "true" : "false"));
    kv.set("out", a.out);
    kv.set("markdown", md);
    if (a.drm.empty()) {
        const KeyValues cfg = dspec.to_config();
        for (const auto& [k, v] : cfg.entries()) kv.set("drm." + k, v);
    } else {
        kv.set("drm", a.drm);
    }
    record_solver(kv, a.solver);
    kv.set("failures", static_cast<long long>(report.failures()));
    write_manifest(kv, stem_path(a.out) + ".manifest");

    std::cout << report_to_markdown(report);
    if (report.failures() == report.rows.size() && !report.rows.empty()) {
        std::cerr << "error: every solver run failed\n";
        return 1;
    }
    if (report.failures() > 0) {
        std::cerr << report.failures() << " of " << report.rows.size() << " runs failed (" << warnings
                  << " warnings)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rotating scatter mask image reconstruction", "rsm"};
    app.set_version_flag("--version", std::string(RSM_VERSION));
    app.require_subcommand(1);

    PhantomArgs phantom;
    DrmArgs drm;
    SimArgs sim;
    ReconArgs recon;
    BenchArgs bench;
    add_phantom(app, phantom);
    add_synth_drm(app, drm);
    add_simulate(app, sim);
    add_reconstruct(app, recon);
    add_bench(app, bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    try {
        if (name == "phantom") return run_phantom(*cmd, phantom);
        if (name == "synth-drm") return run_synth_drm(*cmd, drm);
        if (name == "simulate") return run_simulate(sim);
        if (name == "reconstruct") return run_reconstruct(recon);
        if (name == "bench") return run_bench(*cmd, bench);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << cmd->help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
