#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstring>

#include "oracles/oracles.hpp"
#include "rsm/bridge.hpp"
#include "rsm/denoisers.hpp"
#include "rsm/rng.hpp"
#include "rsm/solvers.hpp"
#include "rsm/tensor_io.hpp"

using namespace rsm;
using namespace rsm::bridge;

namespace {

ExternalParams echo(std::vector<std::string> args = {}, double timeout = 10.0) {
    return {RSM_ECHO_DENOISER, std::move(args), timeout};
}

Field field_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const BridgeError& e) {
        return e.field();
    }
    ADD_FAILURE() << "no BridgeError thrown";
    return Field::Process;
}

}  // namespace

TEST(BridgeFrames, RequestSizeFollowsLayout) {
    EXPECT_EQ(kRequestHeaderBytes, 4u + 1u + 4u + 4u + 8u);
    EXPECT_EQ(request_frame_size(75, 180), 21u + 8u * 13500u);
    const auto frame = encode_request(Matrix(75, 180), 0.5);
    EXPECT_EQ(frame.size(), request_frame_size(75, 180));
}

TEST(BridgeFrames, RequestFieldOffsets) {
    const auto frame = encode_request(Matrix(2, 3, {1, 2, 3, 4, 5, 6}), 0.25);
    EXPECT_EQ(std::memcmp(frame.data(), "RSMD", 4), 0);
    EXPECT_EQ(frame[4], 1);
    EXPECT_EQ(io::get_u32(frame.data() + 5), 2u);
    EXPECT_EQ(io::get_u32(frame.data() + 9), 3u);
    EXPECT_EQ(io::get_f64(frame.data() + 13), 0.25);
    EXPECT_EQ(io::get_f64(frame.data() + 21), 1.0);
    EXPECT_EQ(io::get_f64(frame.data() + 21 + 40), 6.0);
}

TEST(BridgeFrames, ResponseLayouts) {
    const auto ok = encode_ok_response(Matrix(1, 2, {7, 8}));
    EXPECT_EQ(ok.size(), kResponseHeaderBytes + 16);
    EXPECT_EQ(ok[4], 0);
    const auto err = encode_error_response(1, 2, "boom");
    EXPECT_EQ(err.size(), kResponseHeaderBytes + 4 + 4);
    EXPECT_EQ(err[4], 1);
    EXPECT_EQ(io::get_u32(err.data() + 13), 4u);
}

TEST(BridgeClient, EchoIsBitwiseLossless) {
    Rng rng(1);
    Matrix img(75, 180);
    for (auto& v : img.data()) v = rng.normal() * 1e6 + 1e-300;
    BridgeClient client(echo());
    EXPECT_EQ(client.denoise(img, NoiseLevel(0.1)), img);
}

TEST(BridgeClient, ServesRepeatedRequestsAndShutsDownCleanly) {
    Rng rng(2);
    BridgeClient client(echo());
    for (int k = 0; k < 20; ++k) {
        const Matrix img = oracle::random_matrix(rng, 3 + k % 4, 5, -1, 1);
        EXPECT_EQ(client.denoise(img, NoiseLevel(0.01 * k)), img);
    }
    EXPECT_EQ(client.shutdown(), 0);
}

TEST(BridgeClient, VersionMismatch) {
    BridgeClient client(echo({"--protocol-version", "2"}));
    EXPECT_EQ(field_of([&] { client.denoise(Matrix(2, 2), NoiseLevel(1)); }), Field::Version);
}

TEST(BridgeClient, WrongDimensions) {
    BridgeClient client(echo({"--misbehave", "wrong-dims"}));
    EXPECT_EQ(field_of([&] { client.denoise(Matrix(2, 2), NoiseLevel(1)); }), Field::Cols);
}

TEST(BridgeClient, BadMagic) {
    BridgeClient client(echo({"--misbehave", "bad-magic"}));
    EXPECT_EQ(field_of([&] { client.denoise(Matrix(2, 2), NoiseLevel(1)); }), Field::Magic);
}

TEST(BridgeClient, NonFinitePayloadIsRejected) {
    BridgeClient client(echo({"--misbehave", "nan"}));
    try {
        client.denoise(Matrix(2, 2), NoiseLevel(1));
        FAIL();
    } catch (const BridgeError& e) {
        EXPECT_EQ(e.field(), Field::Payload);
        EXPECT_NE(std::string(e.what()).find("row 0, col 0"), std::string::npos) << e.what();
    }
}

TEST(BridgeClient, ServerErrorStatus) {
    BridgeClient client(echo({"--misbehave", "error"}));
    try {
        client.denoise(Matrix(2, 2), NoiseLevel(1));
        FAIL();
    } catch (const BridgeError& e) {
        EXPECT_EQ(e.field(), Field::Status);
        EXPECT_NE(std::string(e.what()).find("injected failure"), std::string::npos);
    }
}

TEST(BridgeClient, ServerExitIsProcessError) {
    BridgeClient client(echo({"--misbehave", "exit"}));
    EXPECT_EQ(field_of([&] { client.denoise(Matrix(2, 2), NoiseLevel(1)); }), Field::Process);
}

TEST(BridgeClient, TimeoutKillsHungServer) {
    BridgeClient client(echo({"--misbehave", "hang"}, 0.3));
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_EQ(field_of([&] { client.denoise(Matrix(2, 2), NoiseLevel(1)); }), Field::Timeout);
    const double waited = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(waited, 3.0);
    client.shutdown();
}

TEST(BridgeClient, BrokenClientRefusesFurtherRequests) {
    BridgeClient client(echo({"--misbehave", "bad-magic", "--after", "1"}));
    EXPECT_NO_THROW(client.denoise(Matrix(1, 2), NoiseLevel(1)));
    EXPECT_THROW(client.denoise(Matrix(1, 2), NoiseLevel(1)), BridgeError);
    EXPECT_EQ(field_of([&] { client.denoise(Matrix(1, 2), NoiseLevel(1)); }), Field::Process);
}

TEST(BridgeClient, MissingExecutable) {
    EXPECT_EQ(field_of([] { BridgeClient c(ExternalParams{"/nonexistent/denoiser", {}, 1.0}); }), Field::Process);
}

TEST(BridgeSolver, ExternalEchoMatchesIdentityBitwise) {
    Rng rng(3);
    const ResponseMatrix drm(oracle::random_matrix(rng, 4, 12, 0.0, 1.0));
    Signal y(12);
    for (auto& v : y.data()) v = rng.uniform(0, 5);
    AdmmConfig cfg;
    cfg.iterations = 25;
    cfg.denoiser = DenoiserSpec::identity();
    const auto ref = reconstruct_l1_dnn(drm, y, cfg);
    cfg.denoiser = DenoiserSpec::external(RSM_ECHO_DENOISER);
    const auto ext = reconstruct_l1_dnn(drm, y, cfg);
    EXPECT_EQ(ext.image, ref.image);
}

TEST(BridgeSolver, FailureNamesTheIteration) {
    Rng rng(4);
    const ResponseMatrix drm(oracle::random_matrix(rng, 2, 8, 0.0, 1.0));
    Signal y(8);
    for (auto& v : y.data()) v = rng.uniform(0, 5);
    AdmmConfig cfg;
    cfg.iterations = 10;
    cfg.denoiser = DenoiserSpec::external(RSM_ECHO_DENOISER, {"--misbehave", "nan", "--after", "3"});
    try {
        reconstruct_l1_dnn(drm, y, cfg);
        FAIL();
    } catch (const SolverError& e) {
        EXPECT_EQ(e.iteration(), 4);
        EXPECT_NE(std::string(e.what()).find("payload"), std::string::npos) << e.what();
    }
}
