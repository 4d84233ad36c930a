#pragma once

#include "texharm/imaging.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace texharm::io {

// Native grid layout (all little-endian):
//   bytes 0-3   magic "TXGI"
//   bytes 4-7   uint32 width
//   bytes 8-11  uint32 height
//   bytes 12-15 uint32 domain tag (0 RawCounts, 1 Hounsfield, 2 Normalized)
//   then width*height IEEE-754 float32 values, row-major.
inline constexpr char kNativeMagic[4] = {'T', 'X', 'G', 'I'};
inline constexpr std::size_t kNativeHeaderBytes = 16;

/// HU values are stored in PGM as HU + 1024.
inline constexpr double kPgmHuOffset = 1024.0;

enum class ImageFormat { Native, Pgm16 };

/// How 16-bit PGM samples are interpreted on load.
enum class PgmEncoding {
    HounsfieldOffset,  // sample - 1024, domain Hounsfield
    RawCounts,         // sample as-is, domain RawCounts
};

/// Native float32 encoding; values are narrowed to float.
std::string encode_native(const GrayImage& img);
GrayImage decode_native(const std::string& bytes);

/// P5, maxval 65535, big-endian samples. Values are rounded and must fit
/// in [0, 65535] after encoding; Normalized images are rejected.
std::string encode_pgm16(const GrayImage& img);
GrayImage decode_pgm16(const std::string& bytes, PgmEncoding encoding = PgmEncoding::HounsfieldOffset);

/// Sniffs the leading bytes.
ImageFormat detect_format(const std::string& bytes);

GrayImage load_image(const std::filesystem::path& path,
                     PgmEncoding pgm_encoding = PgmEncoding::HounsfieldOffset);

/// Format chosen by extension: ".pgm" writes PGM, anything else native.
void save_image(const GrayImage& img, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace texharm::io
