#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sepcp/cpstat.hpp"

namespace sepcp {

/// How a replicate is studentized. `block` is the block sample variance of the
/// resample; `pipeline` reruns decontamination and the flat-top estimator on
/// the resample, mirroring the observed statistic.
enum class ReplicateStudentizer { block, pipeline };

std::string_view to_string(ReplicateStudentizer s);
ReplicateStudentizer parse_replicate_studentizer(std::string_view text);

struct BootstrapConfig {
    std::size_t replicates = 1000;   ///< M
    std::size_t block_length = 0;    ///< K; 0 selects round(n^(1/3))
    std::uint64_t seed = 0;
    StatisticKind kind = StatisticKind::sum_a;
    Alternative alternative = Alternative::epidemic;
    unsigned threads = 0;            ///< 0 uses every hardware thread
    ReplicateStudentizer studentizer = ReplicateStudentizer::block;

    /// Effective K for a series of length n; validates 1 <= K < n.
    std::size_t resolved_block_length(std::size_t n) const;
};

/// Sorted bootstrap replicates of the studentized statistic.
class BootstrapDistribution {
public:
    BootstrapDistribution() = default;
    BootstrapDistribution(std::vector<double> replicates, double observed);

    const std::vector<double>& replicates() const noexcept { return sorted_; }
    double observed() const noexcept { return observed_; }

    /// (1 + #{T* >= T_obs}) / (M + 1).
    double p_value() const noexcept { return p_value_; }

    /// Upper alpha-quantile c*(alpha): the ceil((1 - alpha) M)-th smallest replicate.
    double critical_value(double alpha) const;

    /// Step (7): reject when T_obs > c*(alpha).
    bool rejects(double alpha) const { return observed_ > critical_value(alpha); }

    /// Replicates that were redrawn because their block variance was zero.
    std::size_t regenerated = 0;
    std::size_t block_length = 0;

private:
    std::vector<double> sorted_;
    double observed_ = 0.0;
    double p_value_ = 1.0;
};

/// Circular block resample of residual columns: block j (0-based) starts at
/// starts[j], and e*[jK + k] = e[(starts[j] + k) mod n], truncated to n rows.
Eigen::MatrixXd circular_block_resample(const Eigen::MatrixXd& residuals, std::size_t block_length,
                                        std::span<const std::size_t> starts);

/// Block-variance studentizer of a resampled series:
/// (1/n) sum over blocks of (sum_{k in block} (e*_i - mean e*_i))^2.
Eigen::VectorXd block_variance(const Eigen::MatrixXd& resampled, std::size_t block_length);

/// Statistic of one bootstrap replicate for a fixed set of block starts.
/// Returns a negative value when a block variance is zero (degenerate draw).
double bootstrap_replicate(const Eigen::MatrixXd& residuals, std::size_t block_length,
                           std::span<const std::size_t> starts, StatisticKind kind,
                           Alternative alternative = Alternative::epidemic,
                           ReplicateStudentizer studentizer = ReplicateStudentizer::block);

/// Studentized circular block bootstrap on precomputed decontaminated residuals.
BootstrapDistribution bootstrap_residuals(const Eigen::MatrixXd& residuals, double observed,
                                          const BootstrapConfig& cfg);

/// statistic_diag followed by the bootstrap of its residuals.
BootstrapDistribution bootstrap_test(const ScoreMatrix& scores, const BootstrapConfig& cfg);

struct FdrResult {
    std::vector<bool> rejected;
    /// Largest p_(i) with p_(i) <= i q / m, or 0 when nothing is rejected.
    double threshold = 0.0;
    std::size_t rejections = 0;
};

/// Benjamini-Hochberg step-up procedure.
FdrResult bh_fdr(std::span<const double> p_values, double q);

}  // namespace sepcp
