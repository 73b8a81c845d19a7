#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace sepcp {

/// Row-major dense matrix; rows are time points, columns grid points.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Shape of the discrete domain U = U_1 x ... x U_k. Flat indices are row
/// major: the last axis varies fastest.
class GridSpec {
public:
    GridSpec() = default;
    explicit GridSpec(std::vector<std::size_t> axis_sizes);

    std::size_t rank() const noexcept { return axes_.size(); }
    std::size_t axis_size(std::size_t axis) const { return axes_.at(axis); }
    std::span<const std::size_t> axis_sizes() const noexcept { return axes_; }
    std::size_t size() const noexcept { return total_; }

    /// Product of the sizes of all axes other than `axis`.
    std::size_t complement_size(std::size_t axis) const;
    /// Product of the sizes of the axes before / after `axis`.
    std::size_t outer_size(std::size_t axis) const;
    std::size_t inner_size(std::size_t axis) const;

    std::size_t flat_index(std::span<const std::size_t> coords) const;

    bool operator==(const GridSpec&) const = default;

private:
    std::vector<std::size_t> axes_;
    std::size_t total_ = 0;
};

/// n observations X_1..X_n of a function on a discrete grid.
class FunctionalSeries {
public:
    FunctionalSeries() = default;
    /// Throws ValidationError on shape mismatch, n < 2, or non-finite values.
    FunctionalSeries(GridSpec grid, RowMatrix values);

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t length() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    const RowMatrix& values() const noexcept { return values_; }

    /// Time slice X_t for 1-based t.
    Eigen::Ref<const Eigen::RowVectorXd> slice(std::size_t t) const { return values_.row(t - 1); }

private:
    GridSpec grid_;
    RowMatrix values_;
};

enum class ChangeKind { none, epidemic, amoc };

/// Mean change Delta applied on a fraction of the series.
struct ChangeSpec {
    ChangeKind kind = ChangeKind::none;
    double theta1 = 1.0;
    double theta2 = 1.0;
    Eigen::VectorXd delta;

    static ChangeSpec none() { return {}; }
    static ChangeSpec epidemic(double theta1, double theta2, Eigen::VectorXd delta);
    static ChangeSpec amoc(double theta, Eigen::VectorXd delta);

    double duration() const noexcept { return theta2 - theta1; }
    void validate() const;
};

/// floor(theta * n), tolerant of representation error such as 0.3 * 10.
std::size_t scaled_floor(double theta, std::size_t n);

/// 1-based half-open segment (first, last]: t is shifted iff first < t <= last.
std::pair<std::size_t, std::size_t> shifted_range(const ChangeSpec& change, std::size_t n);

enum class NoiseProcess { iid_gaussian, ar1, ma1 };

/// Latent-score noise model: Y_t = sum_l eta_{t,l} v_l with each channel an
/// independent scalar process with marginal standard deviation channel_sd[l].
struct NoiseSpec {
    NoiseProcess process = NoiseProcess::iid_gaussian;
    /// rho for AR(1), psi for MA(1); ignored for i.i.d. noise.
    double coefficient = 0.0;
    /// L x G, one orthonormal field per row.
    RowMatrix latent_basis;
    Eigen::VectorXd channel_sd;
    /// Mean field mu over the grid.
    Eigen::VectorXd mean;

    void validate(const GridSpec& grid) const;
};

/// Tensor products of orthonormal cosine vectors, `per_axis[a]` along axis a.
/// Rows are ordered with the last axis index varying fastest.
RowMatrix separable_cosine_basis(const GridSpec& grid, std::span<const std::size_t> per_axis);

/// Orthonormal DCT-II vector of frequency `k` on `m` points.
Eigen::VectorXd cosine_vector(std::size_t m, std::size_t k);

/// n x L matrix of latent channel scores, deterministic in the stream.
Eigen::MatrixXd simulate_latent_scores(std::size_t n, NoiseProcess process, double coefficient,
                                       const Eigen::VectorXd& channel_sd, std::uint64_t seed);

/// X_t = mu + sum_l eta_{t,l} v_l + Delta 1{floor(theta1 n) < t <= floor(theta2 n)}.
FunctionalSeries generate_synthetic(const GridSpec& grid, std::size_t n, const NoiseSpec& noise,
                                    const ChangeSpec& change, std::uint64_t seed);

/// Removes the least-squares polynomial trend of the given order in t from every grid point.
FunctionalSeries detrend_polynomial(const FunctionalSeries& series, int order);

}  // namespace sepcp
