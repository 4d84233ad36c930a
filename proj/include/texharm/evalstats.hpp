#pragma once

#include "texharm/softglcm.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace texharm {

// ---------------------------------------------------------------------------
// Radiomic GLCM features
// ---------------------------------------------------------------------------

/// Haralick-style statistics of a symmetric, normalized GLCM. Indices are
/// 1-based bin indices; entropy uses log2; homogeneity is the inverse
/// difference sum P / (1 + |i - j|); energy is the angular second moment.
/// Correlation is reported as 1 when either marginal has zero variance.
struct FeatureVector {
    double contrast = 0.0;
    double dissimilarity = 0.0;
    double homogeneity = 0.0;
    double energy = 0.0;
    double entropy = 0.0;
    double correlation = 0.0;

    static constexpr std::array<std::string_view, 6> names{
        "contrast", "dissimilarity", "homogeneity", "energy", "entropy", "correlation"};

    std::array<double, 6> as_array() const {
        return {contrast, dissimilarity, homogeneity, energy, entropy, correlation};
    }
};

/// Index of the closest bin centre (ties go to the lower index).
std::size_t nearest_bin(double value, const BinningConfig& bins);

/// Hard-binned co-occurrence counts for one offset, optionally symmetrized
/// (C + C^T), normalized to unit sum. Row-major n x n.
std::vector<double> hard_glcm(const GrayImage& img, const Offset& off, const BinningConfig& bins,
                              bool symmetric);

FeatureVector haralick_features(std::span<const double> glcm, std::size_t n_bins);

/// Symmetrized hard GLCMs at distance d for 0/45/90/135 degrees, averaged,
/// then the six statistics. Only the centres of `bins` are used.
FeatureVector glcm_feature_vector(const GrayImage& img, int distance, const BinningConfig& bins);

// ---------------------------------------------------------------------------
// Welch's t-test
// ---------------------------------------------------------------------------

struct WelchResult {
    double t_stat = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// I_x(a, b) by continued fraction. `y` must equal 1 - x; passing it
/// separately avoids cancellation when x is close to 1.
double regularized_incomplete_beta(double a, double b, double x, double y);
inline double regularized_incomplete_beta(double a, double b, double x) {
    return regularized_incomplete_beta(a, b, x, 1.0 - x);
}

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// Two-sided Welch test with Welch-Satterthwaite degrees of freedom.
/// Both samples constant: p = 1 for equal means, 0 otherwise, with
/// dof = n_a + n_b - 2. Samples need at least two values each.
WelchResult welch_test(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Feature tables and the alignment workflow
// ---------------------------------------------------------------------------

/// Rows are images, columns named features. CSV layout: header
/// "id,<feature>,...", then one row per image with its id first.
struct FeatureTable {
    std::vector<std::string> features;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;

    std::optional<std::size_t> column_index(const std::string& feature) const;
    std::vector<double> column(const std::string& feature) const;
    void add_row(std::string id, std::vector<double> values);

    std::string to_csv() const;
    static FeatureTable parse_csv(const std::string& text, const std::string& source = "<csv>");
};

struct FeatureWelch {
    std::string feature;
    WelchResult result;
};

/// Welch test per feature, in `a`'s column order; `b` must contain every
/// feature of `a`.
std::vector<FeatureWelch> welch_tables(const FeatureTable& a, const FeatureTable& b);

struct FeatureAlignment {
    std::string feature;
    WelchResult before;
    std::optional<WelchResult> after;  // only for features in R
    bool significant_before = false;   // in R
    bool aligned_after = false;        // in Z
};

struct AlignmentReport {
    double alpha = 0.01;
    std::vector<FeatureAlignment> features;
    std::vector<std::string> significant;  // R
    std::vector<std::string> aligned;      // Z, subset of R
    /// |Z| / |R| * 100; empty when R is empty.
    std::optional<double> percentage;

    std::string to_csv() const;
    std::string summary() const;
};

/// R: features whose before-tables differ (p < alpha). Z: features of R
/// whose harmonized-vs-target tables no longer differ (p >= alpha).
AlignmentReport alignment_workflow(const FeatureTable& before_source, const FeatureTable& before_target,
                                   const FeatureTable& after_harmonized, const FeatureTable& after_target,
                                   double alpha = 0.01);

// ---------------------------------------------------------------------------
// Frechet distance between Gaussians
// ---------------------------------------------------------------------------

struct GaussianMoments {
    std::vector<double> mean;
    std::vector<double> covariance;  // row-major dim x dim

    std::size_t dim() const noexcept { return mean.size(); }
};

/// Sample mean and unbiased covariance of the table's rows.
GaussianMoments moments_from_table(const FeatureTable& table);

/// Text layout: first line the mean, then `dim` covariance rows, all comma separated.
GaussianMoments parse_moments(const std::string& text, const std::string& source = "<moments>");

/// |mu_r - mu_g|^2 + Tr(S_r + S_g - 2 (S_r S_g)^(1/2)). The trace of the
/// square root is taken from the eigenvalues of the symmetric PSD matrix
/// S_r^(1/2) S_g S_r^(1/2), which shares its spectrum with S_r S_g;
/// negative eigenvalues from round-off are clamped to zero.
double frechet_distance(const GaussianMoments& real, const GaussianMoments& generated);

}  // namespace texharm
