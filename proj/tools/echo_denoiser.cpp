// Reference bridge server: answers every request with the image it was sent.
// --misbehave injects one protocol fault per response so the client's error
// paths can be exercised without a real network.

#include <unistd.h>

#include <chrono>
#include <cstring>
#include <iostream>
#include <limits>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "rsm/bridge.hpp"
#include "rsm/tensor_io.hpp"

using namespace rsm;

int main(int argc, char** argv) {
    CLI::App app{"Echo denoiser speaking the RSMD stdio protocol", "rsm_echo_denoiser"};
    int version = bridge::kProtocolVersion;
    std::string misbehave = "none";
    int after = 0;
    app.add_option("--protocol-version", version, "protocol version this server accepts");
    app.add_option("--misbehave", misbehave, "fault to inject")
        ->check(CLI::IsMember({"none", "wrong-dims", "bad-magic", "nan", "exit", "hang", "error"}));
    app.add_option("--after", after, "answer this many requests correctly before misbehaving");
    CLI11_PARSE(app, argc, argv);

    int served = 0;
    try {
        while (auto req = bridge::read_request(STDIN_FILENO)) {
            if (req->version != version) {
                const auto frame = bridge::encode_error_response(
                    req->rows, req->cols,
                    "unsupported protocol version " + std::to_string(req->version) + " (server speaks version " +
                        std::to_string(version) + ")");
                bridge::write_all(STDOUT_FILENO, frame);
                continue;
            }
            const bool faulty = misbehave != "none" && served >= after;
            ++served;
            if (faulty && misbehave == "exit") return 3;
            if (faulty && misbehave == "hang") {
                for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
            }
            if (faulty && misbehave == "error") {
                bridge::write_all(STDOUT_FILENO, bridge::encode_error_response(req->rows, req->cols, "injected failure"));
                continue;
            }
            Matrix img(req->rows, req->cols, std::move(req->payload));
            if (faulty && misbehave == "wrong-dims") img = Matrix(req->rows, req->cols + 1);
            auto frame = bridge::encode_ok_response(img);
            if (faulty && misbehave == "bad-magic") std::memcpy(frame.data(), "XXXX", 4);
            if (faulty && misbehave == "nan") {
                std::vector<std::uint8_t> nan;
                io::put_f64(nan, std::numeric_limits<double>::quiet_NaN());
                std::memcpy(frame.data() + bridge::kResponseHeaderBytes, nan.data(), 8);
            }
            bridge::write_all(STDOUT_FILENO, frame);
        }
    } catch (const std::exception& e) {
        std::cerr << "rsm_echo_denoiser: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
