#include "rsm/bridge.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "rsm/tensor_io.hpp"

extern char** environ;

namespace rsm::bridge {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void append_header(std::vector<std::uint8_t>& out, std::uint8_t byte, std::uint32_t rows, std::uint32_t cols) {
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    out.push_back(byte);
    io::put_u32(out, rows);
    io::put_u32(out, cols);
}

// Blocking read of exactly len bytes; returns bytes read before EOF.
std::size_t read_exact(int fd, std::uint8_t* dst, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        const ssize_t r = ::read(fd, dst + got, len - got);
        if (r == 0) break;
        if (r < 0) {
            if (errno == EINTR) continue;
            throw BridgeError(Field::Process, std::string("read failed: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(r);
    }
    return got;
}

void ignore_sigpipe_once() {
    static const bool done = [] {
        struct sigaction current {};
        if (sigaction(SIGPIPE, nullptr, &current) == 0 && current.sa_handler == SIG_DFL) {
            signal(SIGPIPE, SIG_IGN);
        }
        return true;
    }();
    (void)done;
}

}  // namespace

const char* field_name(Field f) {
    switch (f) {
        case Field::Process: return "process";
        case Field::Magic: return "magic";
        case Field::Version: return "version";
        case Field::Status: return "status";
        case Field::Rows: return "rows";
        case Field::Cols: return "cols";
        case Field::Variance: return "variance";
        case Field::Payload: return "payload";
        case Field::Message: return "message";
        case Field::Timeout: return "timeout";
    }
    return "unknown";
}

std::size_t request_frame_size(std::size_t rows, std::size_t cols) { return kRequestHeaderBytes + 8 * rows * cols; }

std::vector<std::uint8_t> encode_request(const Matrix& image, double variance, std::uint8_t version) {
    std::vector<std::uint8_t> out;
    out.reserve(request_frame_size(image.rows(), image.cols()));
    append_header(out, version, static_cast<std::uint32_t>(image.rows()), static_cast<std::uint32_t>(image.cols()));
    io::put_f64(out, variance);
    for (double v : image.data()) io::put_f64(out, v);
    return out;
}

std::vector<std::uint8_t> encode_ok_response(const Matrix& image) {
    std::vector<std::uint8_t> out;
    out.reserve(kResponseHeaderBytes + 8 * image.size());
    append_header(out, static_cast<std::uint8_t>(Status::Ok), static_cast<std::uint32_t>(image.rows()),
                  static_cast<std::uint32_t>(image.cols()));
    for (double v : image.data()) io::put_f64(out, v);
    return out;
}

std::vector<std::uint8_t> encode_error_response(std::uint32_t rows, std::uint32_t cols, const std::string& message) {
    std::vector<std::uint8_t> out;
    append_header(out, static_cast<std::uint8_t>(Status::Error), rows, cols);
    io::put_u32(out, static_cast<std::uint32_t>(message.size()));
    out.insert(out.end(), message.begin(), message.end());
    return out;
}

std::optional<Request> read_request(int fd) {
    std::uint8_t head[kRequestHeaderBytes];
    const std::size_t got = read_exact(fd, head, sizeof head);
    if (got == 0) return std::nullopt;
    if (got < sizeof head) throw BridgeError(Field::Magic, "truncated request header");
    Request req;
    if (std::memcmp(head, kMagic, 4) != 0) throw BridgeError(Field::Magic, "bad request magic");
    req.version = head[4];
    req.rows = io::get_u32(head + 5);
    req.cols = io::get_u32(head + 9);
    req.variance = io::get_f64(head + 13);
    const std::size_t count = static_cast<std::size_t>(req.rows) * req.cols;
    std::vector<std::uint8_t> body(8 * count);
    if (read_exact(fd, body.data(), body.size()) != body.size()) {
        throw BridgeError(Field::Payload, "truncated request payload");
    }
    req.payload.resize(count);
    for (std::size_t k = 0; k < count; ++k) req.payload[k] = io::get_f64(body.data() + 8 * k);
    return req;
}

void write_all(int fd, std::span<const std::uint8_t> bytes) {
    std::size_t off = 0;
    while (off < bytes.size()) {
        const ssize_t w = ::write(fd, bytes.data() + off, bytes.size() - off);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw BridgeError(Field::Process, std::string("write failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(w);
    }
}

BridgeClient::BridgeClient(const ExternalParams& params) : params_(params) {
    if (params_.executable.empty()) throw BridgeError(Field::Process, "no denoiser executable configured");
    ignore_sigpipe_once();

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw BridgeError(Field::Process, "pipe() failed");
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw BridgeError(Field::Process, "pipe() failed");
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

    std::vector<std::string> argv_store;
    argv_store.push_back(params_.executable);
    argv_store.insert(argv_store.end(), params_.args.begin(), params_.args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    argv.push_back(nullptr);

    pid_t pid = -1;
    const int rc = posix_spawnp(&pid, params_.executable.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        throw BridgeError(Field::Process, "cannot spawn '" + params_.executable + "': " + std::strerror(rc));
    }
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
    ::fcntl(from_child_, F_SETFL, ::fcntl(from_child_, F_GETFL) | O_NONBLOCK);
}

BridgeClient::~BridgeClient() {
    try {
        shutdown();
    } catch (...) {
    }
}

int BridgeClient::shutdown() {
    if (pid_ < 0) return 0;
    if (to_child_ >= 0) ::close(to_child_);
    to_child_ = -1;

    int status = 0;
    const double give_up = now_seconds() + (broken_ ? 0.5 : 5.0);
    while (true) {
        const pid_t r = ::waitpid(pid_, &status, WNOHANG);
        if (r == pid_ || (r < 0 && errno != EINTR)) break;
        if (now_seconds() > give_up) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    if (from_child_ >= 0) ::close(from_child_);
    from_child_ = -1;
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void BridgeClient::fail(Field field, const std::string& what) {
    broken_ = true;
    if (field == Field::Timeout && pid_ > 0) ::kill(pid_, SIGKILL);
    throw BridgeError(field, what);
}

void BridgeClient::send(std::span<const std::uint8_t> bytes) {
    std::size_t off = 0;
    while (off < bytes.size()) {
        const double left = deadline_ - now_seconds();
        if (left <= 0) fail(Field::Timeout, "request not accepted within " + std::to_string(params_.timeout_seconds) + " s");
        pollfd p{to_child_, POLLOUT, 0};
        const int pr = ::poll(&p, 1, static_cast<int>(std::ceil(left * 1000)));
        if (pr < 0 && errno == EINTR) continue;
        if (pr == 0) continue;
        if (p.revents & (POLLERR | POLLHUP)) fail(Field::Process, "server closed its input");
        const ssize_t w = ::write(to_child_, bytes.data() + off, bytes.size() - off);
        if (w < 0) {
            if (errno == EAGAIN || errno == EINTR) continue;
            fail(Field::Process, std::string("write to server failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(w);
    }
}

void BridgeClient::receive(std::uint8_t* dst, std::size_t len, Field field) {
    std::size_t got = 0;
    while (got < len) {
        const double left = deadline_ - now_seconds();
        if (left <= 0) {
            fail(Field::Timeout, std::string("no complete response within ") + std::to_string(params_.timeout_seconds) +
                                     " s (waiting for " + field_name(field) + ")");
        }
        pollfd p{from_child_, POLLIN, 0};
        const int pr = ::poll(&p, 1, static_cast<int>(std::ceil(left * 1000)));
        if (pr < 0 && errno == EINTR) continue;
        if (pr == 0) continue;
        const ssize_t r = ::read(from_child_, dst + got, len - got);
        if (r == 0) fail(Field::Process, std::string("server closed its output while sending ") + field_name(field));
        if (r < 0) {
            if (errno == EAGAIN || errno == EINTR) continue;
            fail(Field::Process, std::string("read from server failed: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(r);
    }
}

Matrix BridgeClient::denoise(const Matrix& image, NoiseLevel level) {
    if (broken_ || pid_ < 0) throw BridgeError(Field::Process, "bridge is closed after an earlier failure");
    deadline_ = now_seconds() + params_.timeout_seconds;
    send(encode_request(image, level.variance()));

    std::uint8_t head[kResponseHeaderBytes];
    receive(head, 4, Field::Magic);
    if (std::memcmp(head, kMagic, 4) != 0) fail(Field::Magic, "response does not start with RSMD");
    receive(head + 4, kResponseHeaderBytes - 4, Field::Status);
    const std::uint8_t status = head[4];
    const std::uint32_t rows = io::get_u32(head + 5);
    const std::uint32_t cols = io::get_u32(head + 9);

    if (status == static_cast<std::uint8_t>(Status::Error)) {
        std::uint8_t len_bytes[4];
        receive(len_bytes, 4, Field::Message);
        const std::uint32_t len = io::get_u32(len_bytes);
        if (len > (1u << 20)) fail(Field::Message, "error message length " + std::to_string(len) + " is implausible");
        std::string msg(len, '\0');
        receive(reinterpret_cast<std::uint8_t*>(msg.data()), len, Field::Message);
        if (msg.find("version") != std::string::npos) {
            fail(Field::Version, "server rejected protocol version " + std::to_string(kProtocolVersion) + ": " + msg);
        }
        fail(Field::Status, "server reported an error: " + msg);
    }
    if (status != static_cast<std::uint8_t>(Status::Ok)) fail(Field::Status, "unknown status " + std::to_string(status));
    if (rows != image.rows()) {
        fail(Field::Rows, "response has " + std::to_string(rows) + " rows, request had " + std::to_string(image.rows()));
    }
    if (cols != image.cols()) {
        fail(Field::Cols, "response has " + std::to_string(cols) + " cols, request had " + std::to_string(image.cols()));
    }

    std::vector<std::uint8_t> body(8 * image.size());
    receive(body.data(), body.size(), Field::Payload);
    std::vector<double> out(image.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = io::get_f64(body.data() + 8 * k);
        if (!std::isfinite(out[k])) {
            fail(Field::Payload, "non-finite value at pixel " + std::to_string(k) + " (row " +
                                     std::to_string(k / image.cols()) + ", col " + std::to_string(k % image.cols()) + ")");
        }
    }
    return Matrix(image.rows(), image.cols(), std::move(out));
}

}  // namespace rsm::bridge
