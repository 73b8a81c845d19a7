#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sepcp/sepfpca.hpp"

namespace sepcp {

enum class StatisticKind { sum_a, max_b };
enum class Studentization { diagonal, full_experimental };

/// Epidemic scans all segments 1 <= k1 < k2 <= n; AMOC pins k2 = n.
enum class Alternative { epidemic, amoc };

std::string_view to_string(StatisticKind kind);
std::string_view to_string(Studentization s);
std::string_view to_string(Alternative a);
StatisticKind parse_statistic_kind(std::string_view text);
Alternative parse_alternative(std::string_view text);

/// Cumulative sums of mean-centered scores: P_l(k) = sum_{j<=k} (eta_{j,l} - mean_l),
/// k = 0..n. S_n(k1/n, k2/n) = P(k2) - P(k1).
class PartialSumTable {
public:
    explicit PartialSumTable(const Eigen::MatrixXd& scores);

    std::size_t length() const noexcept { return n_; }
    std::size_t dimension() const noexcept { return d_; }

    double at(std::size_t k, std::size_t l) const noexcept { return sums_[k * d_ + l]; }
    /// S_n(k1/n, k2/n) for component l.
    double segment(std::size_t k1, std::size_t k2, std::size_t l) const noexcept {
        return at(k2, l) - at(k1, l);
    }
    Eigen::VectorXd segment(std::size_t k1, std::size_t k2) const;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> sums_;  // (n + 1) x d, row major
};

/// Per-component long-run variances gamma_l^2 with their flat-top bandwidths.
struct LongRunVariance {
    Eigen::VectorXd variance;
    std::vector<std::size_t> bandwidth;
    /// True where the positivity floor sum(e^2) / (n (n - 1)) was the larger term.
    std::vector<bool> floor_active;
};

/// 1-based change indices: the segment is (first, last].
struct ChangePair {
    std::size_t first = 0;
    std::size_t last = 0;
    bool operator==(const ChangePair&) const = default;
};

struct EpidemicEstimate {
    double theta1 = 0.0;
    double theta2 = 1.0;
    ChangePair segment;
    /// Per-component (m1, m2) used for decontamination.
    std::vector<ChangePair> components;

    double duration() const noexcept { return theta2 - theta1; }
};

struct StatisticValue {
    StatisticKind kind = StatisticKind::sum_a;
    double value = 0.0;
    Studentization studentization = Studentization::diagonal;
    /// Only meaningful for the experimental full-matrix studentization.
    std::size_t clipped_eigenvalues = 0;
    double clipped_fraction = 0.0;
};

/// Relative tolerance used to decide that two objective values tie.
inline constexpr double kTieTolerance = 1e-12;

/// argmax over 1 <= k1 < k2 <= n of |sum_{k1<t<=k2} eta_t - (k2-k1)/n sum_t eta_t|.
/// Ties go to the smallest k1, then the largest k2. Requires n >= 3.
ChangePair per_component_change(std::span<const double> scores,
                                Alternative alternative = Alternative::epidemic);

/// Subtracts the mean inside (first, last] and the mean of the complement.
Eigen::VectorXd decontaminate(std::span<const double> scores, ChangePair segment);

/// Flat-top lag window: 1 on [0, 1/2], 2 (1 - |x|) on (1/2, 1), 0 beyond.
double flat_top_weight(double x) noexcept;

/// gamma(h) = (1/n) sum_{j=1}^{n-h} e_j e_{j+h}; zero for h >= n.
double autocovariance(std::span<const double> residuals, std::size_t lag);

struct FlatTopEstimate {
    double variance = 0.0;
    std::size_t bandwidth = 0;  ///< B = 2 b_hat
    std::size_t b_hat = 0;
    bool floor_active = false;
};

/// Flat-top long-run variance with the autocorrelation-threshold bandwidth rule.
/// Throws DegenerateDataError when the residuals have zero variance.
FlatTopEstimate flat_top_long_run_variance(std::span<const double> residuals);

/// Sum and max of the studentized quadratic form over the scan range, plus the
/// change-point estimate under the argmax convention (min x, then max y).
struct ScanResult {
    double sum = 0.0;  ///< T^(A)
    double max = 0.0;  ///< T^(B)
    EpidemicEstimate estimate;
};

/// Scans scores studentized by the diagonal `variances` (one per component).
/// Runs in O(n^2 d) using a PartialSumTable.
ScanResult scan_studentized(const Eigen::MatrixXd& scores, const Eigen::VectorXd& variances,
                            Alternative alternative = Alternative::epidemic);

/// Full pipeline with diagonal long-run variances: per-component change,
/// decontamination, flat-top variance, studentized statistics and estimate.
struct DiagonalStatistics {
    StatisticValue sum;
    StatisticValue max;
    LongRunVariance long_run;
    EpidemicEstimate estimate;
    /// n x d decontaminated residuals e_l(j).
    Eigen::MatrixXd residuals;

    const StatisticValue& get(StatisticKind kind) const { return kind == StatisticKind::sum_a ? sum : max; }
};

DiagonalStatistics statistic_diag(const ScoreMatrix& scores,
                                  Alternative alternative = Alternative::epidemic);

/// Change-point estimate with a given diagonal studentizer.
EpidemicEstimate estimate_changepoints(const ScoreMatrix& scores, const Eigen::VectorXd& variances,
                                       Alternative alternative = Alternative::epidemic);

/// Components whose decontaminated residuals have (numerically) zero variance.
std::vector<std::size_t> degenerate_components(const ScoreMatrix& scores,
                                               Alternative alternative = Alternative::epidemic);

/// Experimental: studentizes with a full d x d long-run covariance. Eigenvalues
/// below floor * (largest eigenvalue) are raised to that level before inversion.
StatisticValue statistic_full_experimental(const ScoreMatrix& scores, const Eigen::MatrixXd& lrcov,
                                           double floor, StatisticKind kind,
                                           Alternative alternative = Alternative::epidemic);

/// Experimental: flat-top long-run covariance matrix of residual columns with a
/// common bandwidth. May be indefinite.
Eigen::MatrixXd long_run_covariance_matrix(const Eigen::MatrixXd& residuals, std::size_t bandwidth);

}  // namespace sepcp
