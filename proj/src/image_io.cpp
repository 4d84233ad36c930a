#include "texharm/image_io.hpp"

#include "texharm/errors.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace texharm::io {

namespace {

constexpr const char* kModule = "imaging.io";

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    }
    return v;
}

std::uint32_t domain_tag(PixelDomain d) {
    switch (d) {
        case PixelDomain::RawCounts: return 0;
        case PixelDomain::Hounsfield: return 1;
        case PixelDomain::Normalized: return 2;
    }
    return 0;
}

PixelDomain domain_from_tag(std::uint32_t tag) {
    switch (tag) {
        case 0: return PixelDomain::RawCounts;
        case 1: return PixelDomain::Hounsfield;
        case 2: return PixelDomain::Normalized;
        default: break;
    }
    fail(ErrorKind::Format, kModule, "unknown domain tag " + std::to_string(tag));
}

// Netpbm header token reader: skips whitespace and '#' comments.
class PnmHeader {
public:
    explicit PnmHeader(const std::string& bytes) : bytes_(bytes) {}

    std::size_t next_number() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
        if (start == pos_) fail(ErrorKind::Format, kModule, "malformed PGM header");
        if (pos_ - start > 9) fail(ErrorKind::Format, kModule, "PGM header value too large");
        return std::stoul(bytes_.substr(start, pos_ - start));
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            fail(ErrorKind::Format, kModule, "malformed PGM header");
        }
        return pos_ + 1;
    }

    void skip(std::size_t n) { pos_ += n; }

private:
    void skip_space() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string encode_native(const GrayImage& img) {
    static_assert(std::endian::native == std::endian::little, "native format writer assumes little-endian host");
    std::string out(kNativeMagic, sizeof kNativeMagic);
    put_u32(out, static_cast<std::uint32_t>(img.width()));
    put_u32(out, static_cast<std::uint32_t>(img.height()));
    put_u32(out, domain_tag(img.domain()));
    out.reserve(kNativeHeaderBytes + 4 * img.size());
    for (double v : img.values()) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        put_u32(out, bits);
    }
    return out;
}

GrayImage decode_native(const std::string& bytes) {
    if (bytes.size() < kNativeHeaderBytes) {
        fail(ErrorKind::Format, kModule, "truncated native header");
    }
    if (std::memcmp(bytes.data(), kNativeMagic, sizeof kNativeMagic) != 0) {
        fail(ErrorKind::Format, kModule, "bad native magic");
    }
    const std::uint64_t width = get_u32(bytes, 4);
    const std::uint64_t height = get_u32(bytes, 8);
    const PixelDomain domain = domain_from_tag(get_u32(bytes, 12));
    if (width == 0 || height == 0) fail(ErrorKind::Format, kModule, "zero image dimension");
    const std::uint64_t expected = kNativeHeaderBytes + 4 * width * height;
    if (bytes.size() != expected) {
        std::ostringstream msg;
        msg << "native payload is " << bytes.size() << " bytes, header implies " << expected;
        fail(ErrorKind::Format, kModule, msg.str());
    }
    std::vector<double> data(width * height);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<float>(get_u32(bytes, kNativeHeaderBytes + 4 * i));
    }
    return GrayImage(width, height, std::move(data), domain);
}

std::string encode_pgm16(const GrayImage& img) {
    double offset = 0.0;
    switch (img.domain()) {
        case PixelDomain::Hounsfield: offset = kPgmHuOffset; break;
        case PixelDomain::RawCounts: offset = 0.0; break;
        case PixelDomain::Normalized:
            fail(ErrorKind::Format, kModule, "16-bit PGM stores Hounsfield or raw images only");
    }
    std::ostringstream header;
    header << "P5\n" << img.width() << ' ' << img.height() << "\n65535\n";
    std::string out = header.str();
    out.reserve(out.size() + 2 * img.size());
    for (double v : img.values()) {
        const double stored = std::round(v + offset);
        if (!(stored >= 0.0 && stored <= 65535.0)) {
            fail(ErrorKind::Format, kModule, "pixel value does not fit the 16-bit PGM range");
        }
        const auto s = static_cast<std::uint16_t>(stored);
        out.push_back(static_cast<char>(s >> 8));
        out.push_back(static_cast<char>(s & 0xFFu));
    }
    return out;
}

GrayImage decode_pgm16(const std::string& bytes, PgmEncoding encoding) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        fail(ErrorKind::Format, kModule, "not a binary PGM (P5) file");
    }
    PnmHeader header(bytes);
    header.skip(2);
    const std::size_t width = header.next_number();
    const std::size_t height = header.next_number();
    const std::size_t maxval = header.next_number();
    if (width == 0 || height == 0) fail(ErrorKind::Format, kModule, "zero image dimension");
    if (maxval != 65535) {
        fail(ErrorKind::Format, kModule, "unsupported PGM maxval " + std::to_string(maxval) + " (need 65535)");
    }
    const std::size_t start = header.raster_start();
    const std::size_t expected = start + 2 * width * height;
    if (bytes.size() != expected) {
        std::ostringstream msg;
        msg << "PGM raster is " << (bytes.size() > start ? bytes.size() - start : 0)
            << " bytes, header implies " << 2 * width * height;
        fail(ErrorKind::Format, kModule, msg.str());
    }
    const bool hu = encoding == PgmEncoding::HounsfieldOffset;
    std::vector<double> data(width * height);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto hi = static_cast<unsigned char>(bytes[start + 2 * i]);
        const auto lo = static_cast<unsigned char>(bytes[start + 2 * i + 1]);
        const double sample = static_cast<double>((hi << 8) | lo);
        data[i] = hu ? sample - kPgmHuOffset : sample;
    }
    return GrayImage(width, height, std::move(data),
                     hu ? PixelDomain::Hounsfield : PixelDomain::RawCounts);
}

ImageFormat detect_format(const std::string& bytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kNativeMagic, 4) == 0) return ImageFormat::Native;
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return ImageFormat::Pgm16;
    fail(ErrorKind::Format, kModule, "unsupported image format");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, kModule, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorKind::Io, kModule, "read error on " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, kModule, "cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::Io, kModule, "write error on " + path.string());
}

GrayImage load_image(const std::filesystem::path& path, PgmEncoding pgm_encoding) {
    const std::string bytes = read_file(path);
    switch (detect_format(bytes)) {
        case ImageFormat::Native: return decode_native(bytes);
        case ImageFormat::Pgm16: return decode_pgm16(bytes, pgm_encoding);
    }
    fail(ErrorKind::Format, kModule, "unsupported image format");
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
    const bool pgm = path.extension() == ".pgm";
    write_file(path, pgm ? encode_pgm16(img) : encode_native(img));
}

}  // namespace texharm::io
