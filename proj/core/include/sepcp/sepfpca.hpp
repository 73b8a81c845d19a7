#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sepcp/model.hpp"

namespace sepcp {

/// Symmetric m x m covariance along one grid axis.
struct CovMatrix {
    std::size_t axis = 0;
    Eigen::MatrixXd values;
};

/// Leading eigenpairs of one directional covariance.
struct DirectionalBasis {
    std::size_t axis = 0;
    /// Full spectrum, non-increasing.
    Eigen::VectorXd eigenvalues;
    /// m x d_i, orthonormal columns, sign-normalized.
    Eigen::MatrixXd vectors;
    /// Set when the gap after the last selected eigenvalue is numerically zero,
    /// so the selected subspace is not identifiable.
    bool near_degenerate = false;

    std::size_t selected() const noexcept { return static_cast<std::size_t>(vectors.cols()); }
};

/// Tensor-product basis built from per-axis directional bases.
///
/// Joint function l has label (r_1, ..., r_k) (0-based, last axis fastest) and
/// value v_{1,r_1}(u_1) * ... * v_{k,r_k}(u_k); its joint eigenvalue is the
/// product of the corresponding directional eigenvalues.
class SeparableBasis {
public:
    SeparableBasis() = default;
    SeparableBasis(GridSpec grid, std::vector<DirectionalBasis> axes);

    const GridSpec& grid() const noexcept { return grid_; }
    const std::vector<DirectionalBasis>& axes() const noexcept { return axes_; }
    std::size_t dimension() const noexcept { return labels_.size(); }
    const std::vector<std::vector<std::size_t>>& labels() const noexcept { return labels_; }
    const Eigen::VectorXd& joint_eigenvalues() const noexcept { return joint_eigenvalues_; }

    /// Joint function l evaluated on the whole grid.
    Eigen::VectorXd joint_function(std::size_t l) const;
    /// d x G matrix of all joint functions.
    RowMatrix joint_functions() const;

    std::vector<std::string> warnings() const;

private:
    GridSpec grid_;
    std::vector<DirectionalBasis> axes_;
    std::vector<std::vector<std::size_t>> labels_;
    Eigen::VectorXd joint_eigenvalues_;
};

/// n x d score series eta_{t,l}; column l belongs to labels[l].
struct ScoreMatrix {
    Eigen::MatrixXd values;
    std::vector<std::vector<std::size_t>> labels;

    std::size_t length() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(values.cols()); }

    /// Wraps raw scores with labels (0), (1), ...; throws on non-finite input or d == 0.
    static ScoreMatrix from_values(Eigen::MatrixXd values);
    /// Copy without the listed columns.
    ScoreMatrix without(std::span<const std::size_t> columns) const;
};

/// Empirical covariance along `axis`, averaged over time and all other axes.
CovMatrix directional_covariance(const FunctionalSeries& series, std::size_t axis);

/// Top-d_i eigenpairs in descending order. Each eigenvector is flipped so that
/// its entry of largest magnitude is positive (lowest index on ties).
DirectionalBasis eigendecompose(const CovMatrix& cov, std::size_t d_i);

/// All prod(d_i) tensor products of the selected per-axis eigenvectors.
SeparableBasis tensor_basis(const GridSpec& grid, std::vector<DirectionalBasis> bases);

/// Convenience: directional covariances, eigendecompositions and tensor basis.
SeparableBasis estimate_separable_basis(const FunctionalSeries& series,
                                        std::span<const std::size_t> d_per_axis);

/// eta_{t,l} = sum_u X_t(u) v_l(u).
ScoreMatrix project(const FunctionalSeries& series, const SeparableBasis& basis);

/// k = c + theta (1 - theta) Delta Delta^T for a covariance over the full grid.
Eigen::MatrixXd contaminated_kernel(const Eigen::MatrixXd& c, const Eigen::VectorXd& delta, double theta);

/// Directional kernel of a full-grid covariance: c_a(u, s) = mean over z of c((u,z),(s,z)).
CovMatrix directional_kernel(const Eigen::MatrixXd& c, const GridSpec& grid, std::size_t axis);

/// Flips v so its largest-magnitude entry is positive.
void normalize_sign(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace sepcp
