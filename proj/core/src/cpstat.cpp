#include "sepcp/cpstat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "sepcp/error.hpp"

namespace sepcp {

std::string_view to_string(StatisticKind kind) {
    return kind == StatisticKind::sum_a ? "sum-A" : "max-B";
}

std::string_view to_string(Studentization s) {
    return s == Studentization::diagonal ? "diagonal" : "full-experimental";
}

std::string_view to_string(Alternative a) {
    return a == Alternative::epidemic ? "epidemic" : "amoc";
}

StatisticKind parse_statistic_kind(std::string_view text) {
    if (text == "sum-A" || text == "sum" || text == "A") return StatisticKind::sum_a;
    if (text == "max-B" || text == "max" || text == "B") return StatisticKind::max_b;
    throw ValidationError("unknown statistic kind '" + std::string(text) + "' (expected sum-A or max-B)");
}

Alternative parse_alternative(std::string_view text) {
    if (text == "epidemic") return Alternative::epidemic;
    if (text == "amoc") return Alternative::amoc;
    throw ValidationError("unknown alternative '" + std::string(text) + "' (expected epidemic or amoc)");
}

PartialSumTable::PartialSumTable(const Eigen::MatrixXd& scores)
    : n_(static_cast<std::size_t>(scores.rows())), d_(static_cast<std::size_t>(scores.cols())) {
    sums_.assign((n_ + 1) * d_, 0.0);
    for (std::size_t l = 0; l < d_; ++l) {
        const double mean = scores.col(static_cast<Eigen::Index>(l)).mean();
        double running = 0.0;
        for (std::size_t k = 1; k <= n_; ++k) {
            running += scores(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(l)) - mean;
            sums_[k * d_ + l] = running;
        }
    }
}

Eigen::VectorXd PartialSumTable::segment(std::size_t k1, std::size_t k2) const {
    Eigen::VectorXd s(static_cast<Eigen::Index>(d_));
    for (std::size_t l = 0; l < d_; ++l) s[static_cast<Eigen::Index>(l)] = segment(k1, k2, l);
    return s;
}

ChangePair per_component_change(std::span<const double> scores, Alternative alternative) {
    const std::size_t n = scores.size();
    if (n < 3) throw ValidationError("per-component change needs n >= 3");
    double mean = 0.0;
    for (double x : scores) mean += x;
    mean /= static_cast<double>(n);
    std::vector<double> p(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) p[k] = p[k - 1] + (scores[k - 1] - mean);

    auto k2_begin = [&](std::size_t k1) { return alternative == Alternative::amoc ? n : k1 + 1; };

    double best = 0.0;
    for (std::size_t k1 = 1; k1 < n; ++k1)
        for (std::size_t k2 = k2_begin(k1); k2 <= n; ++k2) best = std::max(best, std::abs(p[k2] - p[k1]));

    const double threshold = best * (1.0 - kTieTolerance);
    for (std::size_t k1 = 1; k1 < n; ++k1)
        for (std::size_t k2 = n; k2 >= k2_begin(k1); --k2)
            if (std::abs(p[k2] - p[k1]) >= threshold) return {k1, k2};
    return {1, n};
}

Eigen::VectorXd decontaminate(std::span<const double> scores, ChangePair segment) {
    const std::size_t n = scores.size();
    if (!(segment.first >= 1 && segment.first < segment.last && segment.last <= n))
        throw ValidationError("decontamination segment (" + std::to_string(segment.first) + ", " +
                              std::to_string(segment.last) + "] is invalid for n = " + std::to_string(n));
    double inside = 0.0, outside = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        if (j > segment.first && j <= segment.last)
            inside += scores[j - 1];
        else
            outside += scores[j - 1];
    }
    inside /= static_cast<double>(segment.last - segment.first);
    outside /= static_cast<double>(n - segment.last + segment.first);

    Eigen::VectorXd e(static_cast<Eigen::Index>(n));
    for (std::size_t j = 1; j <= n; ++j) {
        const bool in = j > segment.first && j <= segment.last;
        e[static_cast<Eigen::Index>(j - 1)] = scores[j - 1] - (in ? inside : outside);
    }
    return e;
}

double flat_top_weight(double x) noexcept {
    const double a = std::abs(x);
    if (a <= 0.5) return 1.0;
    if (a < 1.0) return 2.0 * (1.0 - a);
    return 0.0;
}

double autocovariance(std::span<const double> e, std::size_t lag) {
    const std::size_t n = e.size();
    if (lag >= n) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j + lag < n; ++j) s += e[j] * e[j + lag];
    return s / static_cast<double>(n);
}

FlatTopEstimate flat_top_long_run_variance(std::span<const double> e) {
    const std::size_t n = e.size();
    if (n < 8) throw ValidationError("long-run variance needs n >= 8");
    const double gamma0 = autocovariance(e, 0);
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
        throw DegenerateDataError("residuals have zero variance");

    const double nd = static_cast<double>(n);
    const double threshold = 1.4 * std::sqrt(std::log10(nd) / nd);

    std::vector<double> gamma{gamma0};
    auto gamma_at = [&](std::size_t h) {
        while (gamma.size() <= h) gamma.push_back(autocovariance(e, gamma.size()));
        return gamma[h];
    };

    // Smallest b >= 1 whose next three autocorrelations are all below the
    // threshold. gamma(h) vanishes for h >= n, so the search terminates.
    std::size_t b = 1;
    for (;; ++b) {
        bool small = true;
        for (std::size_t j = 1; j <= 3 && small; ++j)
            small = std::abs(gamma_at(b + j) / gamma0) < threshold;
        if (small) break;
    }

    FlatTopEstimate out;
    out.b_hat = b;
    out.bandwidth = 2 * b;
    const double bw = static_cast<double>(out.bandwidth);
    double lrv = gamma0;
    for (std::size_t k = 1; k <= out.bandwidth && k < n; ++k)
        lrv += 2.0 * flat_top_weight(static_cast<double>(k) / bw) * gamma_at(k);

    double sum_sq = 0.0;
    for (double x : e) sum_sq += x * x;
    const double floor = sum_sq / (nd * (nd - 1.0));
    out.floor_active = !(lrv > floor);
    out.variance = std::max(lrv, floor);
    return out;
}

ScanResult scan_studentized(const Eigen::MatrixXd& scores, const Eigen::VectorXd& variances,
                            Alternative alternative) {
    const std::size_t n = static_cast<std::size_t>(scores.rows());
    const std::size_t d = static_cast<std::size_t>(scores.cols());
    if (n < 2 || d == 0) throw ValidationError("scan needs n >= 2 and d >= 1");
    if (static_cast<std::size_t>(variances.size()) != d)
        throw ValidationError("need one variance per score component");
    if ((variances.array() <= 0.0).any() || !variances.allFinite())
        throw DegenerateDataError("studentizing variances must be positive");

    const PartialSumTable table(scores);
    std::vector<double> z((n + 1) * d);
    for (std::size_t k = 0; k <= n; ++k)
        for (std::size_t l = 0; l < d; ++l)
            z[k * d + l] = table.at(k, l) / std::sqrt(variances[static_cast<Eigen::Index>(l)]);

    auto quad = [&](std::size_t k1, std::size_t k2) {
        const double* a = &z[k1 * d];
        const double* b = &z[k2 * d];
        double q = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            const double s = b[l] - a[l];
            q += s * s;
        }
        return q;
    };
    const bool amoc = alternative == Alternative::amoc;
    auto k2_begin = [&](std::size_t k1) { return amoc ? n : k1 + 1; };

    // Row sums are reduced in index order so the result does not depend on
    // how rows are partitioned.
    std::vector<double> row_max(n, 0.0);
    double total = 0.0;
    double stat_max = 0.0;
    for (std::size_t k1 = 0; k1 < n; ++k1) {
        double row_sum = 0.0;
        double m = 0.0;
        for (std::size_t k2 = k2_begin(k1); k2 <= n; ++k2) {
            const double q = quad(k1, k2);
            row_sum += q;
            m = std::max(m, q);
        }
        row_max[k1] = m;
        if (k1 >= 1) {
            total += row_sum;
            stat_max = std::max(stat_max, m);
        }
    }

    const double nd = static_cast<double>(n);
    ScanResult out;
    out.sum = amoc ? total / (nd * nd) : total / (nd * nd * nd);
    out.max = stat_max / nd;

    const double global = *std::max_element(row_max.begin(), row_max.end());
    const double threshold = global * (1.0 - kTieTolerance);
    std::size_t x1 = 0;
    while (row_max[x1] < threshold) ++x1;
    std::size_t y1 = n;
    while (y1 > k2_begin(x1) && quad(x1, y1) < threshold) --y1;

    out.estimate.segment = {x1, y1};
    out.estimate.theta1 = static_cast<double>(x1) / nd;
    out.estimate.theta2 = static_cast<double>(y1) / nd;
    return out;
}

namespace {

std::vector<ChangePair> component_changes(const Eigen::MatrixXd& values, Alternative alternative) {
    std::vector<ChangePair> out;
    out.reserve(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index l = 0; l < values.cols(); ++l) {
        const Eigen::VectorXd col = values.col(l);
        out.push_back(per_component_change({col.data(), static_cast<std::size_t>(col.size())}, alternative));
    }
    return out;
}

bool residual_is_degenerate(const Eigen::VectorXd& scores, const Eigen::VectorXd& residual) {
    const double scale = scores.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) return true;
    const double rms = std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size()));
    return rms <= 1e-12 * scale;
}

void check_scores(const ScoreMatrix& scores) {
    if (scores.dimension() == 0) throw ValidationError("score matrix needs d >= 1");
    if (scores.length() < 8) throw ValidationError("change-point statistics need n >= 8");
    if (!scores.values.allFinite()) throw ValidationError("score matrix contains non-finite values");
}

}  // namespace

DiagonalStatistics statistic_diag(const ScoreMatrix& scores, Alternative alternative) {
    check_scores(scores);
    const std::size_t n = scores.length();
    const std::size_t d = scores.dimension();

    DiagonalStatistics out;
    out.residuals.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    out.long_run.variance.resize(static_cast<Eigen::Index>(d));
    const std::vector<ChangePair> changes = component_changes(scores.values, alternative);

    for (std::size_t l = 0; l < d; ++l) {
        const Eigen::VectorXd col = scores.values.col(static_cast<Eigen::Index>(l));
        const Eigen::VectorXd e = decontaminate({col.data(), n}, changes[l]);
        if (residual_is_degenerate(col, e))
            throw DegenerateDataError("score component " + std::to_string(l) +
                                          " has zero variance after decontamination",
                                      l);
        const FlatTopEstimate lrv = flat_top_long_run_variance({e.data(), n});
        out.residuals.col(static_cast<Eigen::Index>(l)) = e;
        out.long_run.variance[static_cast<Eigen::Index>(l)] = lrv.variance;
        out.long_run.bandwidth.push_back(lrv.bandwidth);
        out.long_run.floor_active.push_back(lrv.floor_active);
    }

    const ScanResult scan = scan_studentized(scores.values, out.long_run.variance, alternative);
    out.sum = {StatisticKind::sum_a, scan.sum, Studentization::diagonal};
    out.max = {StatisticKind::max_b, scan.max, Studentization::diagonal};
    out.estimate = scan.estimate;
    out.estimate.components = changes;
    return out;
}

EpidemicEstimate estimate_changepoints(const ScoreMatrix& scores, const Eigen::VectorXd& variances,
                                       Alternative alternative) {
    check_scores(scores);
    EpidemicEstimate est = scan_studentized(scores.values, variances, alternative).estimate;
    est.components = component_changes(scores.values, alternative);
    return est;
}

std::vector<std::size_t> degenerate_components(const ScoreMatrix& scores, Alternative alternative) {
    check_scores(scores);
    std::vector<std::size_t> out;
    const auto changes = component_changes(scores.values, alternative);
    for (std::size_t l = 0; l < scores.dimension(); ++l) {
        const Eigen::VectorXd col = scores.values.col(static_cast<Eigen::Index>(l));
        if (residual_is_degenerate(col, decontaminate({col.data(), static_cast<std::size_t>(col.size())}, changes[l]))) out.push_back(l);
    }
    return out;
}

StatisticValue statistic_full_experimental(const ScoreMatrix& scores, const Eigen::MatrixXd& lrcov,
                                           double floor, StatisticKind kind, Alternative alternative) {
    check_scores(scores);
    const auto d = static_cast<Eigen::Index>(scores.dimension());
    if (lrcov.rows() != d || lrcov.cols() != d)
        throw ValidationError("long-run covariance must be d x d");
    if (!(floor > 0.0)) throw ValidationError("eigenvalue floor must be positive");
    if (!lrcov.allFinite()) throw ValidationError("long-run covariance has non-finite entries");
    const double scale = std::max(1e-300, lrcov.cwiseAbs().maxCoeff());
    if ((lrcov - lrcov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ValidationError("long-run covariance is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (lrcov + lrcov.transpose()));
    Eigen::VectorXd lambda = solver.eigenvalues();
    const double top = lambda.maxCoeff();
    if (!(top > 0.0)) throw DegenerateDataError("all long-run covariance eigenvalues are below the floor");
    const double cut = floor * top;
    std::size_t clipped = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (lambda[i] < cut) {
            lambda[i] = cut;
            ++clipped;
        }

    // Whitening with the symmetric inverse square root turns the quadratic
    // form S^T Sigma^{-1} S into a plain squared norm.
    const Eigen::MatrixXd whiten =
        solver.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * solver.eigenvectors().transpose();
    const Eigen::MatrixXd transformed = scores.values * whiten;
    const ScanResult scan = scan_studentized(transformed, Eigen::VectorXd::Ones(d), alternative);

    StatisticValue out;
    out.kind = kind;
    out.value = kind == StatisticKind::sum_a ? scan.sum : scan.max;
    out.studentization = Studentization::full_experimental;
    out.clipped_eigenvalues = clipped;
    out.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(d);
    return out;
}

Eigen::MatrixXd long_run_covariance_matrix(const Eigen::MatrixXd& residuals, std::size_t bandwidth) {
    const Eigen::Index n = residuals.rows();
    Eigen::MatrixXd sigma = residuals.transpose() * residuals / static_cast<double>(n);
    for (std::size_t h = 1; h <= bandwidth && static_cast<Eigen::Index>(h) < n; ++h) {
        const auto lag = static_cast<Eigen::Index>(h);
        const Eigen::MatrixXd gamma =
            residuals.topRows(n - lag).transpose() * residuals.bottomRows(n - lag) / static_cast<double>(n);
        const double w = flat_top_weight(static_cast<double>(h) / static_cast<double>(bandwidth));
        sigma += w * (gamma + gamma.transpose());
    }
    return sigma;
}

}  // namespace sepcp
