#pragma once

// Test fixtures and brute-force oracles. Nothing here calls into the
// library's numerical code, so the oracles stay independent of it.

#include "texharm/imaging.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace texharm::fixtures {

inline GrayImage constant_image(std::size_t w, std::size_t h, double value) {
    return GrayImage(w, h, std::vector<double>(w * h, value), PixelDomain::Normalized);
}

// Columns alternate lo, hi, lo, ... with the given period (in columns per value).
inline GrayImage vertical_stripes(std::size_t w, std::size_t h, double lo = -0.5, double hi = 0.5,
                                  std::size_t period = 1) {
    std::vector<double> v(w * h);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) v[r * w + c] = (c / period) % 2 == 0 ? lo : hi;
    return GrayImage(w, h, std::move(v), PixelDomain::Normalized);
}

inline GrayImage checkerboard(std::size_t w, std::size_t h, double lo, double hi) {
    std::vector<double> v(w * h);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) v[r * w + c] = (r + c) % 2 == 0 ? lo : hi;
    return GrayImage(w, h, std::move(v), PixelDomain::Normalized);
}

inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed, double lo = -1.0,
                              double hi = 1.0) {
    std::mt19937_64 g(seed);
    std::vector<double> v(w * h);
    for (double& x : v) x = lo + (hi - lo) * uniform01(g);
    return GrayImage(w, h, std::move(v), PixelDomain::Normalized);
}

// Every pixel sits exactly on one of the n centres; returns the image and
// the per-pixel level indices.
struct LevelImage {
    GrayImage image;
    std::vector<std::size_t> levels;
};

inline LevelImage random_level_image(std::size_t w, std::size_t h, const std::vector<double>& centers,
                                     std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::vector<std::size_t> levels(w * h);
    std::vector<double> v(w * h);
    for (std::size_t p = 0; p < w * h; ++p) {
        levels[p] = static_cast<std::size_t>(g() % centers.size());
        v[p] = centers[levels[p]];
    }
    return {GrayImage(w, h, std::move(v), PixelDomain::Normalized), std::move(levels)};
}

// Integer co-occurrence counts by direct enumeration of every pixel: the
// neighbour of (row r, col c) is (r + dv, c + du), skipped when outside.
// Returns the normalized row-major n x n matrix.
inline std::vector<double> brute_force_glcm(const std::vector<std::size_t>& levels, std::size_t w,
                                            std::size_t h, int du, int dv, std::size_t n) {
    std::vector<long long> counts(n * n, 0);
    long long total = 0;
    for (long long r = 0; r < static_cast<long long>(h); ++r) {
        for (long long c = 0; c < static_cast<long long>(w); ++c) {
            const long long r2 = r + dv, c2 = c + du;
            if (r2 < 0 || c2 < 0 || r2 >= static_cast<long long>(h) || c2 >= static_cast<long long>(w)) continue;
            ++counts[levels[static_cast<std::size_t>(r * static_cast<long long>(w) + c)] * n +
                     levels[static_cast<std::size_t>(r2 * static_cast<long long>(w) + c2)]];
            ++total;
        }
    }
    std::vector<double> out(n * n);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
    return out;
}

// Displacement table written out by hand: (du, dv) for d and theta.
inline std::pair<int, int> hand_displacement(int d, int theta) {
    switch (theta) {
        case 0: return {d, 0};
        case 90: return {0, d};
        case 45: {
            const int k = static_cast<int>(std::lround(d / std::sqrt(2.0)));
            return {k, k};
        }
        case 135: {
            const int k = static_cast<int>(std::lround(d / std::sqrt(2.0)));
            return {-k, k};
        }
        default: return {0, 0};
    }
}

// Contrast sum (i - j)^2 P(i, j) with 0-based indices (differences are the same).
inline double contrast_of(const std::vector<double>& p, std::size_t n) {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = static_cast<double>(i) - static_cast<double>(j);
            t += d * d * p[i * n + j];
        }
    return t;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("texharm_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace texharm::fixtures
