#include "rsm/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rsm/error.hpp"

namespace rsm::io {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | p[b];
    return v;
}

double get_f64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
    return std::bit_cast<double>(v);
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError(path, "read failed");
    return bytes;
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError(path, "write failed");
}

std::vector<std::uint8_t> encode_binary(const Matrix& m) {
    std::vector<std::uint8_t> out;
    out.reserve(kMatrixHeaderBytes + 8 * m.size());
    out.insert(out.end(), std::begin(kMatrixMagic), std::end(kMatrixMagic));
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) put_f64(out, v);
    return out;
}

Matrix decode_binary(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMatrixHeaderBytes) {
        throw ParseError(ParseError::Kind::Header, bytes.size(),
                         "rsm-binary: truncated header (" + std::to_string(bytes.size()) + " bytes)");
    }
    if (std::memcmp(bytes.data(), kMatrixMagic, 4) != 0) {
        throw ParseError(ParseError::Kind::Header, 0, "rsm-binary: bad magic at byte 0");
    }
    const std::uint64_t rows = get_u32(bytes.data() + 4);
    const std::uint64_t cols = get_u32(bytes.data() + 8);
    if (rows == 0 || cols == 0) {
        throw ParseError(ParseError::Kind::Header, 4,
                         "rsm-binary: empty shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " at byte 4");
    }
    const std::uint64_t payload = bytes.size() - kMatrixHeaderBytes;
    if (payload != 8 * rows * cols) {
        throw ParseError(ParseError::Kind::DimensionMismatch, kMatrixHeaderBytes,
                         "rsm-binary: header declares " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " but payload at byte 12 holds " + std::to_string(payload) + " bytes");
    }
    std::vector<double> data(rows * cols);
    for (std::uint64_t k = 0; k < data.size(); ++k) {
        const std::uint64_t off = kMatrixHeaderBytes + 8 * k;
        data[k] = get_f64(bytes.data() + off);
        if (!std::isfinite(data[k])) {
            throw ParseError(ParseError::Kind::NonFinite, off,
                             "rsm-binary: non-finite value at byte " + std::to_string(off));
        }
    }
    return Matrix(rows, cols, std::move(data));
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string encode_csv(const Matrix& m) {
    std::string out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

Matrix decode_csv(const std::string& text) {
    std::vector<double> data;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
            while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
            while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
            double v = 0.0;
            auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
                throw ParseError(ParseError::Kind::Syntax, line_no,
                                 "csv: cannot parse field " + std::to_string(count + 1) + " on line " +
                                     std::to_string(line_no));
            }
            if (!std::isfinite(v)) {
                throw ParseError(ParseError::Kind::NonFinite, line_no,
                                 "csv: non-finite value on line " + std::to_string(line_no));
            }
            data.push_back(v);
            ++count;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw ParseError(ParseError::Kind::DimensionMismatch, line_no,
                             "csv: line " + std::to_string(line_no) + " has " + std::to_string(count) +
                                 " fields, expected " + std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) throw ParseError(ParseError::Kind::Header, 0, "csv: no data rows");
    return Matrix(rows, cols, std::move(data));
}

Matrix read_matrix(const std::string& path, Format format) {
    auto bytes = read_file_bytes(path);
    if (format == Format::RsmBinary) return decode_binary(bytes);
    return decode_csv(std::string(bytes.begin(), bytes.end()));
}

Matrix read_matrix(const std::string& path) {
    auto bytes = read_file_bytes(path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMatrixMagic, 4) == 0) return decode_binary(bytes);
    return decode_csv(std::string(bytes.begin(), bytes.end()));
}

void write_matrix(const Matrix& m, const std::string& path, Format format) {
    if (format == Format::RsmBinary) {
        write_file_bytes(path, encode_binary(m));
    } else {
        const auto text = encode_csv(m);
        write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
}

Format format_for_path(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot != std::string::npos) {
        std::string ext = path.substr(dot + 1);
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == "csv") return Format::Csv;
    }
    return Format::RsmBinary;
}

void write_matrix(const Matrix& m, const std::string& path) { write_matrix(m, path, format_for_path(path)); }

std::vector<std::uint8_t> grayscale_pixels(const Matrix& m) {
    const auto [lo_it, hi_it] = std::minmax_element(m.data().begin(), m.data().end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<std::uint8_t> px(m.size(), 0);
    if (!(hi > lo)) return px;
    const double scale = 255.0 / (hi - lo);
    for (std::size_t k = 0; k < m.size(); ++k) {
        px[k] = static_cast<std::uint8_t>(std::lround((m.data()[k] - lo) * scale));
    }
    return px;
}

void export_grayscale(const Matrix& m, const std::string& path) {
    const std::string header = "P5\n" + std::to_string(m.cols()) + " " + std::to_string(m.rows()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    const auto px = grayscale_pixels(m);
    bytes.insert(bytes.end(), px.begin(), px.end());
    write_file_bytes(path, bytes);
}

}  // namespace rsm::io
