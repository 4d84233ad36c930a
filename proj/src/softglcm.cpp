#include "texharm/softglcm.hpp"

#include "texharm/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <sstream>

namespace texharm {

namespace {

constexpr const char* kModule = "softglcm";

struct PairRange {
    std::size_t row_begin, row_end, col_begin, col_end;

    std::size_t count() const {
        if (row_end <= row_begin || col_end <= col_begin) return 0;
        return (row_end - row_begin) * (col_end - col_begin);
    }
};

// Source pixels whose neighbour stays inside the image.
PairRange source_range(std::size_t width, std::size_t height, const Offset& off) {
    auto axis = [](std::size_t n, int delta, std::size_t& begin, std::size_t& end) {
        const auto mag = static_cast<std::size_t>(std::abs(delta));
        if (mag >= n) {
            begin = end = 0;
            return;
        }
        begin = delta < 0 ? mag : 0;
        end = delta > 0 ? n - mag : n;
    };
    PairRange r{};
    axis(height, off.dv(), r.row_begin, r.row_end);
    axis(width, off.du(), r.col_begin, r.col_end);
    return r;
}

void require_normalized(const GrayImage& img) {
    if (img.domain() != PixelDomain::Normalized) {
        fail(ErrorKind::Domain, kModule,
             std::string("soft GLCM needs a Normalized image, got ") + to_string(img.domain()));
    }
}

[[noreturn]] void no_pairs(const Offset& off, const GrayImage& img) {
    std::ostringstream msg;
    msg << "zero in-bounds pixel pairs for offset " << off.label() << " on a " << img.width()
        << "x" << img.height() << " image";
    fail(ErrorKind::Geometry, kModule, msg.str());
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstFieldMap = Eigen::Map<const RowMatrix>;

ConstFieldMap as_matrix(const AssignmentField& field) {
    return ConstFieldMap(field.values.data(), static_cast<Eigen::Index>(field.pixels),
                         static_cast<Eigen::Index>(field.n_bins));
}

// Unnormalized co-occurrence sums, g = S^T N, where S and N stack the
// source and neighbour assignment rows of every in-bounds pair.
std::vector<double> accumulate(const GrayImage& img, const AssignmentField& field,
                               const Offset& off, const PairRange& range) {
    const auto n = static_cast<Eigen::Index>(field.n_bins);
    const std::size_t w = img.width();
    const auto run = static_cast<Eigen::Index>(range.col_end - range.col_begin);
    const ConstFieldMap a = as_matrix(field);
    RowMatrix src(static_cast<Eigen::Index>(range.count()), n);
    RowMatrix nbr(static_cast<Eigen::Index>(range.count()), n);
    Eigen::Index at = 0;
    for (std::size_t r = range.row_begin; r < range.row_end; ++r, at += run) {
        const auto s = static_cast<Eigen::Index>(r * w + range.col_begin);
        const auto q = static_cast<Eigen::Index>((r + static_cast<std::size_t>(off.dv())) * w +
                                                 range.col_begin) + off.du();
        src.middleRows(at, run) = a.middleRows(s, run);
        nbr.middleRows(at, run) = a.middleRows(q, run);
    }
    RowMatrix g(n, n);
    g.noalias() = src.transpose() * nbr;
    return std::vector<double>(g.data(), g.data() + g.size());
}

double checked_total(const std::vector<double>& g) {
    double total = 0.0;
    for (double v : g) total += v;
    if (!(total > 0.0) || !std::isfinite(total)) {
        fail(ErrorKind::Numeric, kModule,
             "co-occurrence mass is zero or non-finite (sigma too small for the pixel values?)");
    }
    return total;
}

}  // namespace

BinningConfig BinningConfig::uniform(std::size_t n_bins, std::optional<double> sigma) {
    if (n_bins < 2) fail(ErrorKind::Argument, kModule, "need at least 2 bins");
    BinningConfig cfg;
    cfg.centers.resize(n_bins);
    const double step = 2.0 / static_cast<double>(n_bins - 1);
    for (std::size_t k = 0; k < n_bins; ++k) cfg.centers[k] = -1.0 + step * static_cast<double>(k);
    cfg.centers.back() = 1.0;
    cfg.sigma = sigma.value_or(0.5 * step);
    cfg.validate();
    return cfg;
}

double BinningConfig::spacing() const {
    if (centers.size() < 2) return 0.0;
    return (centers.back() - centers.front()) / static_cast<double>(centers.size() - 1);
}

void BinningConfig::validate() const {
    if (centers.size() < 2) fail(ErrorKind::Argument, kModule, "need at least 2 bins");
    for (std::size_t k = 0; k < centers.size(); ++k) {
        if (!std::isfinite(centers[k])) fail(ErrorKind::Argument, kModule, "bin centres must be finite");
        if (k > 0 && !(centers[k] > centers[k - 1])) {
            fail(ErrorKind::Argument, kModule, "bin centres must be strictly increasing");
        }
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        fail(ErrorKind::Argument, kModule, "sigma must be positive and finite");
    }
}

bool Offset::is_allowed_angle(int theta_degrees) noexcept {
    return theta_degrees == 0 || theta_degrees == 45 || theta_degrees == 90 || theta_degrees == 135;
}

Offset::Offset(int distance, int theta_degrees) : distance_(distance), theta_(theta_degrees) {
    if (distance < 1) fail(ErrorKind::Argument, kModule, "offset distance must be >= 1");
    if (!is_allowed_angle(theta_degrees)) {
        fail(ErrorKind::Argument, kModule,
             "offset angle must be one of 0, 45, 90, 135 (got " + std::to_string(theta_degrees) + ")");
    }
    constexpr double h = std::numbers::sqrt2 / 2.0;
    double cos_t = 1.0, sin_t = 0.0;
    switch (theta_degrees) {
        case 45: cos_t = h; sin_t = h; break;
        case 90: cos_t = 0.0; sin_t = 1.0; break;
        case 135: cos_t = -h; sin_t = h; break;
        default: break;
    }
    du_ = static_cast<int>(std::lround(distance * cos_t));
    dv_ = static_cast<int>(std::lround(distance * sin_t));
}

std::string Offset::label() const {
    return "d=" + std::to_string(distance_) + " theta=" + std::to_string(theta_);
}

AssignmentField soft_assignment(const GrayImage& img, const BinningConfig& bins) {
    require_normalized(img);
    bins.validate();
    const std::size_t n = bins.n_bins();
    const double inv_two_var = 1.0 / (2.0 * bins.sigma * bins.sigma);
    AssignmentField field{img.size(), n, std::vector<double>(img.size() * n)};
    const auto px = img.values();
    for (std::size_t p = 0; p < px.size(); ++p) {
        for (std::size_t k = 0; k < n; ++k) {
            const double z = px[p] - bins.centers[k];
            field.values[p * n + k] = std::exp(-z * z * inv_two_var);
        }
    }
    return field;
}

std::size_t count_valid_pairs(std::size_t width, std::size_t height, const Offset& off) {
    return source_range(width, height, off).count();
}

SoftGlcm soft_glcm_forward(const GrayImage& img, const Offset& off, const BinningConfig& bins) {
    return soft_glcm_forward(img, soft_assignment(img, bins), off);
}

SoftGlcm soft_glcm_forward(const GrayImage& img, const AssignmentField& field, const Offset& off) {
    require_normalized(img);
    if (field.pixels != img.size()) {
        fail(ErrorKind::Argument, kModule, "assignment field does not match the image");
    }
    const PairRange range = source_range(img.width(), img.height(), off);
    if (range.count() == 0) no_pairs(off, img);

    std::vector<double> g = accumulate(img, field, off, range);
    const double total = checked_total(g);
    for (double& v : g) v /= total;
    return SoftGlcm{field.n_bins, std::move(g), off, range.count()};
}

std::vector<double> soft_glcm_backward(const GrayImage& img, const Offset& off,
                                       const BinningConfig& bins,
                                       std::span<const double> upstream) {
    const std::size_t n = bins.n_bins();
    if (upstream.size() != n * n) {
        fail(ErrorKind::Argument, kModule,
             "upstream gradient has " + std::to_string(upstream.size()) + " entries, expected " +
                 std::to_string(n * n));
    }
    const AssignmentField field = soft_assignment(img, bins);
    const PairRange range = source_range(img.width(), img.height(), off);
    if (range.count() == 0) no_pairs(off, img);

    const std::vector<double> g = accumulate(img, field, off, range);
    const double total = checked_total(g);

    // dL/dg(i,j) = (U(i,j) - sum(U .* G)) / total
    double weighted = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) weighted += upstream[k] * g[k];
    weighted /= total;
    std::vector<double> dg(n * n);
    for (std::size_t k = 0; k < n * n; ++k) dg[k] = (upstream[k] - weighted) / total;

    // Per pixel: dg * a (pixel as neighbour partner) and dg^T * a (as source partner).
    const std::size_t npx = img.size();
    const Eigen::Map<const RowMatrix> dg_m(dg.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const RowMatrix dg_a = as_matrix(field) * dg_m.transpose();
    const RowMatrix dgt_a = as_matrix(field) * dg_m;

    // d a_k / dx = -a_k (x - b_k) / sigma^2
    const double inv_var = 1.0 / (bins.sigma * bins.sigma);
    const auto px = img.values();
    auto dot_with_slope = [&](std::size_t p, const RowMatrix& vec, std::size_t q) {
        const auto a = field.pixel(p);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += -a[k] * (px[p] - bins.centers[k]) * inv_var * vec(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k));
        }
        return acc;
    };

    const std::size_t w = img.width();
    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(off.dv()) * static_cast<std::ptrdiff_t>(w) + off.du();
    std::vector<double> grad(npx, 0.0);
    for (std::size_t r = range.row_begin; r < range.row_end; ++r) {
        for (std::size_t c = range.col_begin; c < range.col_end; ++c) {
            const std::size_t p = r * w + c;
            const auto q = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(p) + shift);
            grad[p] += dot_with_slope(p, dg_a, q);
            grad[q] += dot_with_slope(q, dgt_a, p);
        }
    }
    return grad;
}

}  // namespace texharm
