#include <gtest/gtest.h>

#include <cmath>

#include "rsm/bench.hpp"
#include "rsm/error.hpp"

using namespace rsm;

namespace {

std::vector<SolverChoice> quick_solvers(std::initializer_list<Method> methods) {
    std::vector<SolverChoice> out;
    for (Method m : methods) {
        SolverChoice c;
        c.method = m;
        c.admm.iterations = 20;
        c.mlem.iterations = 20;
        out.push_back(c);
    }
    return out;
}

BenchmarkReport small_run(std::initializer_list<Method> methods, int jobs = 1) {
    DrmSynthSpec d;
    d.rows = 12;
    d.cols = 24;
    const auto suite = make_test_suite(12, 24, 1);
    BenchmarkOptions opt;
    opt.jobs = jobs;
    return run_benchmark(suite, synth_drm(d), quick_solvers(methods), NoiseSpec{}, opt);
}

}  // namespace

TEST(Nrmse, ScaledTruth) {
    const Matrix t(2, 2, {1, -2, 3, 0.5});
    for (double c : {0.0, 1.0, 2.0, -1.0}) {
        Matrix e = t;
        for (auto& v : e.data()) v *= c;
        EXPECT_NEAR(nrmse(e, t), std::abs(c - 1.0), 1e-15) << c;
    }
}

TEST(Nrmse, Errors) {
    EXPECT_THROW(nrmse(Matrix(2, 2), Matrix(2, 2)), ConfigError);
    EXPECT_THROW(nrmse(Matrix(2, 2), Matrix(2, 3)), DimensionError);
}

TEST(Method, Names) {
    for (Method m : {Method::MlemMrp, Method::L1, Method::L1Dnn}) EXPECT_EQ(parse_method(method_name(m)), m);
    EXPECT_THROW(parse_method("sart"), ConfigError);
}

TEST(Report, CsvRoundTrip) {
    BenchmarkReport r;
    r.solvers = {"l1", "l1-dnn"};
    r.rows.push_back({0, "disc", "l1", 0.1234567890123456789, 0.0, 7, ""});
    r.rows.push_back({0, "disc", "l1-dnn", std::nan(""), 0.0, 7, "boom"});
    r.rows.push_back({1, "ring", "l1", 1.0 / 3.0, 12.5, 8, ""});
    const BenchmarkReport back = report_from_csv(report_to_csv(r));
    ASSERT_EQ(back.rows.size(), 3u);
    EXPECT_EQ(back.rows[0].nrmse, r.rows[0].nrmse);
    EXPECT_TRUE(std::isnan(back.rows[1].nrmse));
    EXPECT_EQ(back.rows[2].wall_ms, 12.5);
    EXPECT_EQ(back.rows[2].seed, 8u);
    EXPECT_EQ(back.rows[2].shape, "ring");
    EXPECT_EQ(report_to_csv(back), report_to_csv(r));
    EXPECT_EQ(r.failures(), 1u);
}

TEST(Report, EmptyCsvIsHeaderOnly) {
    EXPECT_EQ(report_to_csv(BenchmarkReport{}), "phantom_id,shape,solver,nrmse,wall_ms,seed\n");
    EXPECT_TRUE(report_from_csv("phantom_id,shape,solver,nrmse,wall_ms,seed\n").rows.empty());
    EXPECT_THROW(report_from_csv("id,shape\n"), ParseError);
}

TEST(Report, AveragesAndMarkdown) {
    BenchmarkReport r;
    r.solvers = {"a", "b"};
    r.rows = {{0, "disc", "a", 0.2, 0, 0, ""}, {1, "disc", "a", 0.4, 0, 0, ""}, {2, "ring", "a", 0.9, 0, 0, ""},
              {0, "disc", "b", 0.1, 0, 0, ""}};
    EXPECT_NEAR(*r.average("a", "disc"), 0.3, 1e-12);
    EXPECT_NEAR(*r.average("a"), 0.5, 1e-12);
    EXPECT_FALSE(r.average("b", "ring").has_value());
    const std::string md = report_to_markdown(r);
    EXPECT_NE(md.find("| | a | b |"), std::string::npos) << md;
    EXPECT_NE(md.find("| Disc | 0.300 | 0.100 |"), std::string::npos) << md;
    EXPECT_NE(md.find("| Ring | 0.900 | n/a |"), std::string::npos) << md;
    EXPECT_NE(md.find("| Average | 0.500 | 0.100 |"), std::string::npos) << md;
}

TEST(Benchmark, RowCountAndOrdering) {
    const auto r = small_run({Method::L1Dnn, Method::L1});
    ASSERT_EQ(r.rows.size(), 40u);
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
        EXPECT_EQ(r.rows[k].phantom_id, static_cast<int>(k / 2));
        EXPECT_EQ(r.rows[k].solver, k % 2 == 0 ? "l1" : "l1-dnn");
        EXPECT_TRUE(std::isfinite(r.rows[k].nrmse));
        EXPECT_EQ(r.rows[k].wall_ms, 0.0);
    }
    EXPECT_EQ(r.failures(), 0u);
}

TEST(Benchmark, CsvIsIndependentOfThreadCount) {
    const auto a = small_run({Method::MlemMrp, Method::L1Dnn}, 1);
    const auto b = small_run({Method::MlemMrp, Method::L1Dnn}, 4);
    EXPECT_EQ(report_to_csv(a), report_to_csv(b));
}

TEST(Benchmark, FailuresAreRecordedNotFatal) {
    DrmSynthSpec d;
    d.rows = 12;
    d.cols = 24;
    auto solvers = quick_solvers({Method::L1Dnn});
    solvers[0].admm.denoiser = DenoiserSpec::external("/nonexistent/denoiser");
    const auto suite = make_test_suite(12, 24, 1);
    const auto r = run_benchmark({suite.begin(), suite.begin() + 2}, synth_drm(d), solvers, NoiseSpec{});
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_EQ(r.failures(), 2u);
    EXPECT_FALSE(r.rows[0].error.empty());
}
