#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rsm/matrix.hpp"

namespace rsm::io {

enum class Format { Csv, RsmBinary };

/// rsm-binary layout: "RSM1", u32 rows, u32 cols, rows*cols little-endian float64.
inline constexpr char kMatrixMagic[4] = {'R', 'S', 'M', '1'};
inline constexpr std::size_t kMatrixHeaderBytes = 12;

Matrix read_matrix(const std::string& path, Format format);
void write_matrix(const Matrix& m, const std::string& path, Format format);

/// Reads either format, chosen by the leading magic bytes.
Matrix read_matrix(const std::string& path);
/// Writes csv for a ".csv" extension, rsm-binary otherwise.
void write_matrix(const Matrix& m, const std::string& path);
Format format_for_path(const std::string& path);

/// In-memory codecs; the file functions are thin wrappers over these.
std::vector<std::uint8_t> encode_binary(const Matrix& m);
Matrix decode_binary(std::span<const std::uint8_t> bytes);
std::string encode_csv(const Matrix& m);
Matrix decode_csv(const std::string& text);

/// Binary P5 graymap, min-max normalized to 0..255; a constant matrix maps to zeros.
void export_grayscale(const Matrix& m, const std::string& path);
std::vector<std::uint8_t> grayscale_pixels(const Matrix& m);

/// Shortest text that round-trips through strtod with 17 significant digits.
std::string format_double(double v);

// Little-endian primitives shared with the denoiser bridge.
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f64(std::vector<std::uint8_t>& out, double v);
std::uint32_t get_u32(const std::uint8_t* p);
double get_f64(const std::uint8_t* p);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace rsm::io
