#include "texharm/evalstats.hpp"

#include "texharm/errors.hpp"
#include "texharm/keyvalue.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace texharm {

namespace {

constexpr const char* kModule = "evalstats";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::vector<std::string> nonblank_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        lines.push_back(line);
    }
    return lines;
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    fail(ErrorKind::Numeric, kModule, "incomplete beta continued fraction did not converge");
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t nearest_bin(double value, const BinningConfig& bins) {
    std::size_t best = 0;
    double best_dist = std::abs(value - bins.centers[0]);
    for (std::size_t k = 1; k < bins.centers.size(); ++k) {
        const double d = std::abs(value - bins.centers[k]);
        if (d < best_dist) {
            best = k;
            best_dist = d;
        }
    }
    return best;
}

std::vector<double> hard_glcm(const GrayImage& img, const Offset& off, const BinningConfig& bins,
                              bool symmetric) {
    bins.validate();
    const std::size_t n = bins.n_bins();
    std::vector<std::size_t> level(img.size());
    for (std::size_t p = 0; p < img.size(); ++p) level[p] = nearest_bin(img.values()[p], bins);

    std::vector<double> counts(n * n, 0.0);
    double total = 0.0;
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    const auto w = static_cast<std::ptrdiff_t>(img.width());
    for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            const std::ptrdiff_t r2 = r + off.dv(), c2 = c + off.du();
            if (r2 < 0 || r2 >= h || c2 < 0 || c2 >= w) continue;
            const std::size_t i = level[static_cast<std::size_t>(r * w + c)];
            const std::size_t j = level[static_cast<std::size_t>(r2 * w + c2)];
            counts[i * n + j] += 1.0;
            if (symmetric) counts[j * n + i] += 1.0;
            total += symmetric ? 2.0 : 1.0;
        }
    }
    if (total == 0.0) {
        fail(ErrorKind::Geometry, kModule, "zero in-bounds pixel pairs for offset " + off.label());
    }
    for (double& v : counts) v /= total;
    return counts;
}

FeatureVector haralick_features(std::span<const double> glcm, std::size_t n) {
    if (glcm.size() != n * n || n == 0) fail(ErrorKind::Argument, kModule, "GLCM is not n x n");
    FeatureVector f;
    double mu_i = 0.0, mu_j = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = glcm[i * n + j];
            const double diff = std::abs(static_cast<double>(i) - static_cast<double>(j));
            f.contrast += diff * diff * p;
            f.dissimilarity += diff * p;
            f.homogeneity += p / (1.0 + diff);
            f.energy += p * p;
            if (p > 0.0) f.entropy -= p * std::log2(p);
            mu_i += static_cast<double>(i + 1) * p;
            mu_j += static_cast<double>(j + 1) * p;
        }
    }
    double var_i = 0.0, var_j = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = glcm[i * n + j];
            const double di = static_cast<double>(i + 1) - mu_i;
            const double dj = static_cast<double>(j + 1) - mu_j;
            var_i += di * di * p;
            var_j += dj * dj * p;
            cov += di * dj * p;
        }
    }
    const double denom = std::sqrt(var_i * var_j);
    f.correlation = denom > 1e-12 ? cov / denom : 1.0;
    if (f.entropy < 0.0) f.entropy = 0.0;  // -0.0 from a single-cell matrix
    return f;
}

FeatureVector glcm_feature_vector(const GrayImage& img, int distance, const BinningConfig& bins) {
    if (img.domain() != PixelDomain::Normalized) {
        fail(ErrorKind::Domain, kModule, "feature extraction expects a Normalized image");
    }
    const std::size_t n = bins.n_bins();
    std::vector<double> mean(n * n, 0.0);
    static constexpr int kAngles[] = {0, 45, 90, 135};
    for (int theta : kAngles) {
        const Offset off(distance, theta);
        if (count_valid_pairs(img.width(), img.height(), off) == 0) {
            fail(ErrorKind::Geometry, kModule, "zero in-bounds pixel pairs for offset " + off.label());
        }
        const std::vector<double> p = hard_glcm(img, off, bins, true);
        for (std::size_t k = 0; k < p.size(); ++k) mean[k] += 0.25 * p[k];
    }
    return haralick_features(mean, n);
}

// ---------------------------------------------------------------------------

double regularized_incomplete_beta(double a, double b, double x, double y) {
    if (!(a > 0.0) || !(b > 0.0)) fail(ErrorKind::Argument, kModule, "incomplete beta needs a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) fail(ErrorKind::Argument, kModule, "incomplete beta needs x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (y == 0.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                             b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) fail(ErrorKind::Argument, kModule, "Student t needs dof > 0");
    if (std::isnan(t)) fail(ErrorKind::Numeric, kModule, "t statistic is NaN");
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    const double p = regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t2), t2 / (dof + t2));
    return std::clamp(p, 0.0, 1.0);
}

WelchResult welch_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        fail(ErrorKind::Argument, kModule, "Welch test needs at least two values per sample");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(b.begin(), b.end(), finite)) {
        fail(ErrorKind::Numeric, kModule, "Welch test sample contains a non-finite value");
    }
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = mean_of(a), mb = mean_of(b);
    const double qa = variance_of(a, ma) / na;
    const double qb = variance_of(b, mb) / nb;
    const double se2 = qa + qb;

    WelchResult r;
    if (se2 == 0.0) {
        r.dof = na + nb - 2.0;
        if (ma == mb) {
            r.t_stat = 0.0;
            r.p_value = 1.0;
        } else {
            r.t_stat = ma > mb ? INFINITY : -INFINITY;
            r.p_value = 0.0;
        }
        return r;
    }
    r.t_stat = (ma - mb) / std::sqrt(se2);
    r.dof = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    r.p_value = student_t_two_sided_p(r.t_stat, r.dof);
    return r;
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> FeatureTable::column_index(const std::string& feature) const {
    const auto it = std::find(features.begin(), features.end(), feature);
    if (it == features.end()) return std::nullopt;
    return static_cast<std::size_t>(it - features.begin());
}

std::vector<double> FeatureTable::column(const std::string& feature) const {
    const auto idx = column_index(feature);
    if (!idx) fail(ErrorKind::Argument, kModule, "feature table has no column '" + feature + "'");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[*idx]);
    return out;
}

void FeatureTable::add_row(std::string id, std::vector<double> values) {
    if (values.size() != features.size()) {
        fail(ErrorKind::Argument, kModule, "row for '" + id + "' has the wrong number of features");
    }
    ids.push_back(std::move(id));
    rows.push_back(std::move(values));
}

std::string FeatureTable::to_csv() const {
    std::string out = "id";
    for (const auto& f : features) out += "," + f;
    out += "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out += ids[r];
        for (double v : rows[r]) out += "," + fmt(v);
        out += "\n";
    }
    return out;
}

FeatureTable FeatureTable::parse_csv(const std::string& text, const std::string& source) {
    const auto lines = nonblank_lines(text);
    if (lines.empty()) fail(ErrorKind::Format, kModule, source + ": empty feature table");
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 2 || header[0] != "id") {
        fail(ErrorKind::Format, kModule, source + ": header must be 'id,<feature>,...'");
    }
    FeatureTable table;
    table.features.assign(header.begin() + 1, header.end());
    for (std::size_t f = 0; f < table.features.size(); ++f) {
        if (table.features[f].empty()) fail(ErrorKind::Format, kModule, source + ": empty feature name");
        if (std::find(table.features.begin(), table.features.begin() + static_cast<std::ptrdiff_t>(f),
                      table.features[f]) != table.features.begin() + static_cast<std::ptrdiff_t>(f)) {
            fail(ErrorKind::Format, kModule, source + ": duplicate feature '" + table.features[f] + "'");
        }
    }
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto cells = split_csv_line(lines[l]);
        const std::string where = source + ":" + std::to_string(l + 1);
        if (cells.size() != header.size()) {
            fail(ErrorKind::Format, kModule, where + ": expected " + std::to_string(header.size()) + " cells");
        }
        std::vector<double> values;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            try {
                values.push_back(parse_double(cells[c], where));
            } catch (const Error& e) {
                fail(ErrorKind::Format, kModule, e.what());
            }
        }
        table.add_row(cells[0], std::move(values));
    }
    return table;
}

std::vector<FeatureWelch> welch_tables(const FeatureTable& a, const FeatureTable& b) {
    std::vector<FeatureWelch> out;
    for (const auto& feature : a.features) {
        if (!b.column_index(feature)) {
            fail(ErrorKind::Argument, kModule, "second table lacks feature '" + feature + "'");
        }
        const auto ca = a.column(feature);
        const auto cb = b.column(feature);
        out.push_back({feature, welch_test(ca, cb)});
    }
    return out;
}

AlignmentReport alignment_workflow(const FeatureTable& before_source, const FeatureTable& before_target,
                                   const FeatureTable& after_harmonized, const FeatureTable& after_target,
                                   double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::Argument, kModule, "alpha must be in (0, 1)");
    AlignmentReport report;
    report.alpha = alpha;
    for (const auto& fw : welch_tables(before_source, before_target)) {
        FeatureAlignment fa;
        fa.feature = fw.feature;
        fa.before = fw.result;
        fa.significant_before = fw.result.p_value < alpha;
        if (fa.significant_before) {
            if (!after_harmonized.column_index(fa.feature) || !after_target.column_index(fa.feature)) {
                fail(ErrorKind::Argument, kModule,
                     "after-harmonization tables lack feature '" + fa.feature + "' from R");
            }
            fa.after = welch_test(after_harmonized.column(fa.feature), after_target.column(fa.feature));
            fa.aligned_after = fa.after->p_value >= alpha;
            report.significant.push_back(fa.feature);
            if (fa.aligned_after) report.aligned.push_back(fa.feature);
        }
        report.features.push_back(std::move(fa));
    }
    if (!report.significant.empty()) {
        report.percentage = 100.0 * static_cast<double>(report.aligned.size()) /
                            static_cast<double>(report.significant.size());
    }
    return report;
}

std::string AlignmentReport::to_csv() const {
    std::string out = "feature,t_before,dof_before,p_before,in_R,t_after,dof_after,p_after,in_Z\n";
    for (const auto& f : features) {
        out += f.feature + "," + fmt(f.before.t_stat) + "," + fmt(f.before.dof) + "," + fmt(f.before.p_value) +
               "," + (f.significant_before ? "1" : "0") + ",";
        if (f.after) {
            out += fmt(f.after->t_stat) + "," + fmt(f.after->dof) + "," + fmt(f.after->p_value);
        } else {
            out += ",,";
        }
        out += std::string(",") + (f.aligned_after ? "1" : "0") + "\n";
    }
    return out;
}

std::string AlignmentReport::summary() const {
    std::ostringstream out;
    out << "alpha: " << alpha << "\n";
    out << "features tested: " << features.size() << "\n";
    out << "significantly different before (R): " << significant.size() << "\n";
    out << "no longer different after (Z): " << aligned.size() << "\n";
    if (percentage) {
        out << "aligned percentage: " << fmt(*percentage) << "\n";
    } else {
        out << "aligned percentage: undefined (R is empty)\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------

GaussianMoments moments_from_table(const FeatureTable& table) {
    const std::size_t n = table.rows.size();
    const std::size_t d = table.features.size();
    if (n < 2) fail(ErrorKind::Argument, kModule, "need at least two samples for a covariance");
    GaussianMoments m{std::vector<double>(d, 0.0), std::vector<double>(d * d, 0.0)};
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < d; ++i) m.mean[i] += row[i];
    }
    for (double& v : m.mean) v /= static_cast<double>(n);
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                m.covariance[i * d + j] += (row[i] - m.mean[i]) * (row[j] - m.mean[j]);
            }
        }
    }
    for (double& v : m.covariance) v /= static_cast<double>(n - 1);
    return m;
}

GaussianMoments parse_moments(const std::string& text, const std::string& source) {
    const auto lines = nonblank_lines(text);
    if (lines.empty()) fail(ErrorKind::Format, kModule, source + ": empty moments file");
    GaussianMoments m;
    try {
        m.mean = parse_double_list(lines[0], source + ": mean");
        const std::size_t d = m.mean.size();
        if (lines.size() != d + 1) {
            fail(ErrorKind::Format, kModule,
                 source + ": expected a mean line and " + std::to_string(d) + " covariance rows");
        }
        for (std::size_t r = 0; r < d; ++r) {
            const auto row = parse_double_list(lines[r + 1], source + ": covariance row");
            if (row.size() != d) fail(ErrorKind::Format, kModule, source + ": covariance row has wrong length");
            m.covariance.insert(m.covariance.end(), row.begin(), row.end());
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Format) throw;
        fail(ErrorKind::Format, kModule, e.what());
    }
    return m;
}

double frechet_distance(const GaussianMoments& real, const GaussianMoments& generated) {
    using Matrix = Eigen::MatrixXd;
    const std::size_t d = real.dim();
    if (d == 0 || generated.dim() != d || real.covariance.size() != d * d ||
        generated.covariance.size() != d * d) {
        fail(ErrorKind::Argument, kModule, "Frechet distance: dimension mismatch");
    }
    const auto di = static_cast<Eigen::Index>(d);
    auto load = [&](const std::vector<double>& v, const char* which) {
        Matrix m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            v.data(), di, di);
        if (!m.allFinite()) fail(ErrorKind::Numeric, kModule, std::string(which) + " covariance is not finite");
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
            fail(ErrorKind::Argument, kModule, std::string(which) + " covariance is not symmetric");
        }
        return Matrix(0.5 * (m + m.transpose()));
    };
    const Matrix cov_r = load(real.covariance, "real");
    const Matrix cov_g = load(generated.covariance, "generated");

    Eigen::SelfAdjointEigenSolver<Matrix> eig_r(cov_r);
    const Eigen::VectorXd root_vals = eig_r.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix root_r = eig_r.eigenvectors() * root_vals.asDiagonal() * eig_r.eigenvectors().transpose();
    Matrix inner = root_r * cov_g * root_r;
    inner = 0.5 * (inner + inner.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig_inner(inner, Eigen::EigenvaluesOnly);
    const double trace_sqrt = eig_inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    double mean_term = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = real.mean[i] - generated.mean[i];
        mean_term += diff * diff;
    }
    const double fd = mean_term + cov_r.trace() + cov_g.trace() - 2.0 * trace_sqrt;
    if (!std::isfinite(fd)) fail(ErrorKind::Numeric, kModule, "Frechet distance is not finite");
    return std::max(0.0, fd);
}

}  // namespace texharm
