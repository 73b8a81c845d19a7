#include "sepcp/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "sepcp/error.hpp"
#include "sepcp/parallel.hpp"
#include "sepcp/rng.hpp"

namespace sepcp {

std::string_view to_string(ReplicateStudentizer s) {
    return s == ReplicateStudentizer::block ? "block" : "pipeline";
}

ReplicateStudentizer parse_replicate_studentizer(std::string_view text) {
    if (text == "block") return ReplicateStudentizer::block;
    if (text == "pipeline") return ReplicateStudentizer::pipeline;
    throw ValidationError("unknown bootstrap studentizer '" + std::string(text) + "' (expected block or pipeline)");
}

std::size_t BootstrapConfig::resolved_block_length(std::size_t n) const {
    std::size_t k = block_length;
    if (k == 0) k = static_cast<std::size_t>(std::lround(std::cbrt(static_cast<double>(n))));
    if (k < 1 || k >= n)
        throw ValidationError("block length " + std::to_string(k) + " must satisfy 1 <= K < n = " +
                              std::to_string(n));
    return k;
}

BootstrapDistribution::BootstrapDistribution(std::vector<double> replicates, double observed)
    : sorted_(std::move(replicates)), observed_(observed) {
    if (sorted_.empty()) throw ValidationError("bootstrap distribution needs at least one replicate");
    std::sort(sorted_.begin(), sorted_.end());
    const auto exceed = static_cast<std::size_t>(
        sorted_.end() - std::lower_bound(sorted_.begin(), sorted_.end(), observed_));
    p_value_ = static_cast<double>(1 + exceed) / static_cast<double>(sorted_.size() + 1);
}

double BootstrapDistribution::critical_value(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    const double m = static_cast<double>(sorted_.size());
    auto rank = static_cast<std::ptrdiff_t>(std::ceil((1.0 - alpha) * m - 1e-9));
    rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(sorted_.size()));
    return sorted_[static_cast<std::size_t>(rank - 1)];
}

Eigen::MatrixXd circular_block_resample(const Eigen::MatrixXd& residuals, std::size_t block_length,
                                        std::span<const std::size_t> starts) {
    const std::size_t n = static_cast<std::size_t>(residuals.rows());
    const std::size_t blocks = (n + block_length - 1) / block_length;
    if (starts.size() < blocks)
        throw ValidationError("need " + std::to_string(blocks) + " block starts, got " +
                              std::to_string(starts.size()));
    Eigen::MatrixXd out(residuals.rows(), residuals.cols());
    std::size_t row = 0;
    for (std::size_t j = 0; j < blocks; ++j) {
        if (starts[j] >= n) throw ValidationError("block start out of range");
        for (std::size_t k = 0; k < block_length && row < n; ++k, ++row)
            out.row(static_cast<Eigen::Index>(row)) =
                residuals.row(static_cast<Eigen::Index>((starts[j] + k) % n));
    }
    return out;
}

Eigen::VectorXd block_variance(const Eigen::MatrixXd& resampled, std::size_t block_length) {
    const std::size_t n = static_cast<std::size_t>(resampled.rows());
    const Eigen::RowVectorXd mean = resampled.colwise().mean();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(resampled.cols());
    for (std::size_t start = 0; start < n; start += block_length) {
        const std::size_t len = std::min(block_length, n - start);
        const Eigen::RowVectorXd block_sum =
            resampled.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len))
                .colwise()
                .sum() -
            static_cast<double>(len) * mean;
        out += block_sum.transpose().cwiseAbs2();
    }
    return out / static_cast<double>(n);
}

double bootstrap_replicate(const Eigen::MatrixXd& residuals, std::size_t block_length,
                           std::span<const std::size_t> starts, StatisticKind kind,
                           Alternative alternative, ReplicateStudentizer studentizer) {
    const Eigen::MatrixXd resampled = circular_block_resample(residuals, block_length, starts);
    if (studentizer == ReplicateStudentizer::pipeline) {
        try {
            return statistic_diag(ScoreMatrix::from_values(resampled), alternative).get(kind).value;
        } catch (const DegenerateDataError&) {
            return -1.0;
        }
    }
    const Eigen::VectorXd variance = block_variance(resampled, block_length);
    // A block variance this small relative to its own component is a degenerate draw.
    for (Eigen::Index l = 0; l < variance.size(); ++l) {
        const double scale = std::max(1e-300, resampled.col(l).cwiseAbs().maxCoeff());
        if (!(variance[l] > 1e-24 * scale * scale)) return -1.0;
    }
    const ScanResult scan = scan_studentized(resampled, variance, alternative);
    return kind == StatisticKind::sum_a ? scan.sum : scan.max;
}

BootstrapDistribution bootstrap_residuals(const Eigen::MatrixXd& residuals, double observed,
                                          const BootstrapConfig& cfg) {
    const std::size_t n = static_cast<std::size_t>(residuals.rows());
    if (n < 8) throw ValidationError("bootstrap needs n >= 8");
    if (cfg.replicates < 1) throw ValidationError("bootstrap needs M >= 1 replicates");
    const std::size_t k = cfg.resolved_block_length(n);
    const std::size_t blocks = (n + k - 1) / k;
    constexpr int kMaxAttempts = 64;

    std::vector<double> values(cfg.replicates);
    std::vector<unsigned char> redrawn(cfg.replicates, 0);
    parallel_for(
        cfg.replicates,
        [&](std::size_t r) {
            std::vector<std::size_t> starts(blocks);
            for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
                PhiloxStream rng = attempt == 0
                                       ? make_stream(cfg.seed, "bootstrap", r)
                                       : make_stream(cfg.seed, "bootstrap-retry-" + std::to_string(attempt), r);
                for (auto& s : starts) s = static_cast<std::size_t>(rng.uniform_index(n));
                const double t = bootstrap_replicate(residuals, k, starts, cfg.kind, cfg.alternative, cfg.studentizer);
                if (t >= 0.0) {
                    values[r] = t;
                    redrawn[r] = attempt > 0 ? 1 : 0;
                    return;
                }
            }
            throw DegenerateDataError("bootstrap replicate " + std::to_string(r) +
                                      " stayed degenerate after repeated redraws");
        },
        cfg.threads);

    const auto regenerated = static_cast<std::size_t>(std::count(redrawn.begin(), redrawn.end(), 1));
    if (static_cast<double>(regenerated) > 0.01 * static_cast<double>(cfg.replicates))
        throw DegenerateDataError(std::to_string(regenerated) + " of " + std::to_string(cfg.replicates) +
                                  " bootstrap replicates had a zero variance");

    BootstrapDistribution dist(std::move(values), observed);
    dist.regenerated = regenerated;
    dist.block_length = k;
    return dist;
}

BootstrapDistribution bootstrap_test(const ScoreMatrix& scores, const BootstrapConfig& cfg) {
    const DiagonalStatistics stats = statistic_diag(scores, cfg.alternative);
    return bootstrap_residuals(stats.residuals, stats.get(cfg.kind).value, cfg);
}

FdrResult bh_fdr(std::span<const double> p_values, double q) {
    if (p_values.empty()) throw ValidationError("FDR correction needs at least one p-value");
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("FDR level q must lie in (0, 1)");
    for (double p : p_values)
        if (!(p > 0.0 && p <= 1.0)) throw ValidationError("p-values must lie in (0, 1]");

    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::size_t cutoff = 0;  // number rejected
    for (std::size_t i = 1; i <= m; ++i)
        if (p_values[order[i - 1]] <= static_cast<double>(i) * q / static_cast<double>(m)) cutoff = i;

    FdrResult out;
    out.rejected.assign(m, false);
    for (std::size_t i = 0; i < cutoff; ++i) out.rejected[order[i]] = true;
    out.rejections = cutoff;
    out.threshold = static_cast<double>(cutoff) * q / static_cast<double>(m);
    return out;
}

}  // namespace sepcp
