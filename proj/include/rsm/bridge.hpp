#pragma once

// Wire protocol for out-of-process denoisers, carried over the child's
// stdin/stdout. All integers and floats are little-endian.
//
//   request:  "RSMD" | u8 version | u32 rows | u32 cols | f64 variance | rows*cols f64
//   response: "RSMD" | u8 status  | u32 rows | u32 cols | status 0: rows*cols f64
//                                                       | status 1: u32 len | len bytes UTF-8
//
// One response per request. A server keeps serving until end of input.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsm/denoisers.hpp"
#include "rsm/error.hpp"
#include "rsm/matrix.hpp"

namespace rsm::bridge {

inline constexpr char kMagic[4] = {'R', 'S', 'M', 'D'};
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kRequestHeaderBytes = 21;
inline constexpr std::size_t kResponseHeaderBytes = 13;

enum class Status : std::uint8_t { Ok = 0, Error = 1 };

std::size_t request_frame_size(std::size_t rows, std::size_t cols);

std::vector<std::uint8_t> encode_request(const Matrix& image, double variance,
                                         std::uint8_t version = kProtocolVersion);
std::vector<std::uint8_t> encode_ok_response(const Matrix& image);
std::vector<std::uint8_t> encode_error_response(std::uint32_t rows, std::uint32_t cols, const std::string& message);

/// Frame field a protocol failure is attributed to.
enum class Field { Process, Magic, Version, Status, Rows, Cols, Variance, Payload, Message, Timeout };
const char* field_name(Field f);

class BridgeError : public Error {
public:
    BridgeError(Field field, const std::string& what)
        : Error(std::string("denoiser bridge [") + field_name(field) + "]: " + what), field_(field) {}
    Field field() const noexcept { return field_; }

private:
    Field field_;
};

struct Request {
    std::uint8_t version = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    double variance = 0.0;
    std::vector<double> payload;
};

/// Blocking frame reader over a file descriptor, used by server fixtures.
/// Returns nullopt on clean end of input before the first byte of a frame.
/// Throws BridgeError for truncated frames.
std::optional<Request> read_request(int fd);
void write_all(int fd, std::span<const std::uint8_t> bytes);

/// Owns one denoiser server process. Spawned in the constructor, reused for
/// every request, shut down (end of input, then wait) in the destructor.
/// Not safe for concurrent use; callers serialize requests.
class BridgeClient {
public:
    explicit BridgeClient(const ExternalParams& params);
    ~BridgeClient();
    BridgeClient(const BridgeClient&) = delete;
    BridgeClient& operator=(const BridgeClient&) = delete;

    Matrix denoise(const Matrix& image, NoiseLevel level);
    /// Closes the request stream and waits for the server; returns its exit status.
    int shutdown();

private:
    void send(std::span<const std::uint8_t> bytes);
    void receive(std::uint8_t* dst, std::size_t len, Field field);
    [[noreturn]] void fail(Field field, const std::string& what);

    ExternalParams params_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    bool broken_ = false;
    double deadline_ = 0.0;
};

}  // namespace rsm::bridge
