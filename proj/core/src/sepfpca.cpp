#include "sepcp/sepfpca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "sepcp/error.hpp"

namespace sepcp {
namespace {

// Multiplies axis `axis` of a row-major tensor by the columns of `v`:
// out[p, r, q] = sum_i in[p, i, q] v(i, r).
std::vector<double> mode_product(const std::vector<double>& in, std::vector<std::size_t>& sizes,
                                 std::size_t axis, const Eigen::MatrixXd& v) {
    std::size_t outer = 1, inner = 1;
    for (std::size_t a = 0; a < axis; ++a) outer *= sizes[a];
    for (std::size_t a = axis + 1; a < sizes.size(); ++a) inner *= sizes[a];
    const std::size_t m = sizes[axis];
    const std::size_t d = static_cast<std::size_t>(v.cols());

    std::vector<double> out(outer * d * inner, 0.0);
    for (std::size_t p = 0; p < outer; ++p)
        for (std::size_t i = 0; i < m; ++i) {
            const double* src = &in[(p * m + i) * inner];
            for (std::size_t r = 0; r < d; ++r) {
                const double w = v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r));
                double* dst = &out[(p * d + r) * inner];
                for (std::size_t q = 0; q < inner; ++q) dst[q] += w * src[q];
            }
        }
    sizes[axis] = d;
    return out;
}

void check_symmetric(const Eigen::MatrixXd& a, const char* what) {
    if (a.rows() != a.cols()) throw ValidationError(std::string(what) + " is not square");
    if (!a.allFinite()) throw ValidationError(std::string(what) + " has non-finite entries");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) throw ValidationError(std::string(what) + " is not symmetric");
}

}  // namespace

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
    if (v.size() == 0) return;
    const double peak = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) >= peak * (1.0 - 1e-10)) {
            if (v[i] < 0.0) v = -v;
            return;
        }
    }
}

SeparableBasis::SeparableBasis(GridSpec grid, std::vector<DirectionalBasis> axes)
    : grid_(std::move(grid)), axes_(std::move(axes)) {
    if (axes_.size() != grid_.rank())
        throw ValidationError("separable basis needs one directional basis per grid axis");
    std::size_t count = 1;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        const auto& b = axes_[a];
        if (b.axis != a) throw ValidationError("directional bases must be given in axis order");
        if (static_cast<std::size_t>(b.vectors.rows()) != grid_.axis_size(a))
            throw ValidationError("directional basis " + std::to_string(a) +
                                  " does not match the grid axis size");
        if (b.selected() == 0) throw ValidationError("each axis needs at least one selected eigenvector");
        count *= b.selected();
    }

    labels_.reserve(count);
    joint_eigenvalues_.resize(static_cast<Eigen::Index>(count));
    std::vector<std::size_t> label(axes_.size(), 0);
    for (std::size_t l = 0; l < count; ++l) {
        labels_.push_back(label);
        double lambda = 1.0;
        for (std::size_t a = 0; a < axes_.size(); ++a)
            lambda *= axes_[a].eigenvalues[static_cast<Eigen::Index>(label[a])];
        joint_eigenvalues_[static_cast<Eigen::Index>(l)] = lambda;
        for (std::size_t a = axes_.size(); a-- > 0;) {
            if (++label[a] < axes_[a].selected()) break;
            label[a] = 0;
        }
    }
}

Eigen::VectorXd SeparableBasis::joint_function(std::size_t l) const {
    const auto& label = labels_.at(l);
    Eigen::VectorXd f(static_cast<Eigen::Index>(grid_.size()));
    std::vector<std::size_t> coord(grid_.rank(), 0);
    for (std::size_t u = 0; u < grid_.size(); ++u) {
        double value = 1.0;
        for (std::size_t a = 0; a < grid_.rank(); ++a)
            value *= axes_[a].vectors(static_cast<Eigen::Index>(coord[a]),
                                      static_cast<Eigen::Index>(label[a]));
        f[static_cast<Eigen::Index>(u)] = value;
        for (std::size_t a = grid_.rank(); a-- > 0;) {
            if (++coord[a] < grid_.axis_size(a)) break;
            coord[a] = 0;
        }
    }
    return f;
}

RowMatrix SeparableBasis::joint_functions() const {
    RowMatrix out(dimension(), grid_.size());
    for (std::size_t l = 0; l < dimension(); ++l) out.row(l) = joint_function(l).transpose();
    return out;
}

std::vector<std::string> SeparableBasis::warnings() const {
    std::vector<std::string> out;
    for (const auto& b : axes_) {
        if (!b.near_degenerate) continue;
        std::ostringstream msg;
        msg << "axis " << b.axis << ": eigenvalue gap after component " << b.selected()
            << " is numerically zero; selected subspace is not identifiable";
        out.push_back(msg.str());
    }
    return out;
}

ScoreMatrix ScoreMatrix::from_values(Eigen::MatrixXd values) {
    if (values.cols() == 0) throw ValidationError("score matrix needs at least one component");
    if (!values.allFinite()) throw ValidationError("score matrix contains non-finite values");
    ScoreMatrix s;
    s.labels.reserve(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index l = 0; l < values.cols(); ++l) s.labels.push_back({static_cast<std::size_t>(l)});
    s.values = std::move(values);
    return s;
}

ScoreMatrix ScoreMatrix::without(std::span<const std::size_t> columns) const {
    ScoreMatrix out;
    std::vector<Eigen::Index> keep;
    for (std::size_t l = 0; l < dimension(); ++l)
        if (std::find(columns.begin(), columns.end(), l) == columns.end())
            keep.push_back(static_cast<Eigen::Index>(l));
    if (keep.empty()) throw ValidationError("no score components left");
    out.values.resize(values.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        out.values.col(static_cast<Eigen::Index>(j)) = values.col(keep[j]);
        out.labels.push_back(labels.empty() ? std::vector<std::size_t>{static_cast<std::size_t>(keep[j])}
                                            : labels[static_cast<std::size_t>(keep[j])]);
    }
    return out;
}

CovMatrix directional_covariance(const FunctionalSeries& series, std::size_t axis) {
    const GridSpec& grid = series.grid();
    if (axis >= grid.rank()) throw ValidationError("axis " + std::to_string(axis) + " out of range");
    const std::size_t n = series.length();
    if (n < 2) throw ValidationError("directional covariance needs n >= 2");

    const std::size_t m = grid.axis_size(axis);
    const std::size_t outer = grid.outer_size(axis);
    const std::size_t inner = grid.inner_size(axis);
    const Eigen::RowVectorXd mean = series.values().colwise().mean();

    // For each time point, lay the deviations out as an m x (outer * inner)
    // matrix D_t and accumulate D_t D_t^T.
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd dev(m, outer * inner);
    for (std::size_t t = 0; t < n; ++t) {
        const auto row = series.values().row(t);
        for (std::size_t p = 0; p < outer; ++p)
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t q = 0; q < inner; ++q) {
                    const std::size_t u = (p * m + i) * inner + q;
                    dev(i, p * inner + q) = row[u] - mean[u];
                }
        acc.selfadjointView<Eigen::Lower>().rankUpdate(dev);
    }
    acc = acc.selfadjointView<Eigen::Lower>();
    acc /= static_cast<double>(n) * static_cast<double>(outer * inner);
    return {axis, std::move(acc)};
}

DirectionalBasis eigendecompose(const CovMatrix& cov, std::size_t d_i) {
    check_symmetric(cov.values, "covariance matrix");
    const std::size_t m = static_cast<std::size_t>(cov.values.rows());
    if (d_i < 1 || d_i > m)
        throw ValidationError("requested " + std::to_string(d_i) + " eigenvectors of a " +
                              std::to_string(m) + "x" + std::to_string(m) + " matrix");

    const Eigen::MatrixXd sym = 0.5 * (cov.values + cov.values.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw Error("symmetric eigensolver did not converge");

    // Eigen returns ascending order.
    DirectionalBasis out;
    out.axis = cov.axis;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.vectors.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d_i));
    for (std::size_t r = 0; r < d_i; ++r) {
        out.vectors.col(static_cast<Eigen::Index>(r)) =
            solver.eigenvectors().col(static_cast<Eigen::Index>(m - 1 - r));
        normalize_sign(out.vectors.col(static_cast<Eigen::Index>(r)));
    }
    if (d_i < m) {
        const double gap = out.eigenvalues[static_cast<Eigen::Index>(d_i) - 1] -
                           out.eigenvalues[static_cast<Eigen::Index>(d_i)];
        out.near_degenerate = gap < 1e-10 * std::abs(out.eigenvalues[0]);
    }
    return out;
}

SeparableBasis tensor_basis(const GridSpec& grid, std::vector<DirectionalBasis> bases) {
    return SeparableBasis(grid, std::move(bases));
}

SeparableBasis estimate_separable_basis(const FunctionalSeries& series,
                                        std::span<const std::size_t> d_per_axis) {
    const GridSpec& grid = series.grid();
    if (d_per_axis.size() != grid.rank())
        throw ValidationError("need one component count per grid axis");
    std::vector<DirectionalBasis> bases;
    bases.reserve(grid.rank());
    for (std::size_t a = 0; a < grid.rank(); ++a)
        bases.push_back(eigendecompose(directional_covariance(series, a), d_per_axis[a]));
    return tensor_basis(grid, std::move(bases));
}

ScoreMatrix project(const FunctionalSeries& series, const SeparableBasis& basis) {
    if (series.grid() != basis.grid()) throw ValidationError("basis grid does not match the series grid");
    const std::size_t n = series.length();
    const std::size_t d = basis.dimension();

    ScoreMatrix out;
    out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    out.labels = basis.labels();
    const auto axis_sizes = series.grid().axis_sizes();
    for (std::size_t t = 0; t < n; ++t) {
        const auto row = series.values().row(static_cast<Eigen::Index>(t));
        std::vector<double> tensor(row.data(), row.data() + row.size());
        std::vector<std::size_t> sizes(axis_sizes.begin(), axis_sizes.end());
        for (std::size_t a = 0; a < sizes.size(); ++a)
            tensor = mode_product(tensor, sizes, a, basis.axes()[a].vectors);
        for (std::size_t l = 0; l < d; ++l)
            out.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) = tensor[l];
    }
    return out;
}

Eigen::MatrixXd contaminated_kernel(const Eigen::MatrixXd& c, const Eigen::VectorXd& delta, double theta) {
    if (c.rows() != c.cols() || c.rows() != delta.size())
        throw ValidationError("covariance and change field shapes do not match");
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("duration fraction must lie in [0, 1]");
    return c + theta * (1.0 - theta) * delta * delta.transpose();
}

CovMatrix directional_kernel(const Eigen::MatrixXd& c, const GridSpec& grid, std::size_t axis) {
    if (axis >= grid.rank()) throw ValidationError("axis out of range");
    if (static_cast<std::size_t>(c.rows()) != grid.size() || c.rows() != c.cols())
        throw ValidationError("kernel does not match the grid size");
    const std::size_t m = grid.axis_size(axis);
    const std::size_t outer = grid.outer_size(axis);
    const std::size_t inner = grid.inner_size(axis);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < outer; ++p)
                for (std::size_t q = 0; q < inner; ++q)
                    s += c((p * m + i) * inner + q, (p * m + j) * inner + q);
            out(i, j) = s / static_cast<double>(outer * inner);
        }
    return {axis, std::move(out)};
}

}  // namespace sepcp
