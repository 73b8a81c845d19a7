#include "sepcp/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/QR>

#include "sepcp/error.hpp"
#include "sepcp/rng.hpp"

namespace sepcp {

GridSpec::GridSpec(std::vector<std::size_t> axis_sizes) : axes_(std::move(axis_sizes)) {
    if (axes_.empty()) throw ValidationError("grid needs at least one axis");
    total_ = 1;
    for (std::size_t s : axes_) {
        if (s == 0) throw ValidationError("grid axis sizes must be positive");
        total_ *= s;
    }
}

std::size_t GridSpec::complement_size(std::size_t axis) const {
    return total_ / axis_size(axis);
}

std::size_t GridSpec::outer_size(std::size_t axis) const {
    std::size_t p = 1;
    for (std::size_t a = 0; a < axis; ++a) p *= axes_.at(a);
    return p;
}

std::size_t GridSpec::inner_size(std::size_t axis) const {
    std::size_t p = 1;
    for (std::size_t a = axis + 1; a < axes_.size(); ++a) p *= axes_[a];
    return p;
}

std::size_t GridSpec::flat_index(std::span<const std::size_t> coords) const {
    if (coords.size() != axes_.size()) throw ValidationError("coordinate rank mismatch");
    std::size_t idx = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        if (coords[a] >= axes_[a]) throw ValidationError("coordinate out of range");
        idx = idx * axes_[a] + coords[a];
    }
    return idx;
}

FunctionalSeries::FunctionalSeries(GridSpec grid, RowMatrix values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.rank() == 0) throw ValidationError("series grid is empty");
    if (static_cast<std::size_t>(values_.cols()) != grid_.size())
        throw ValidationError("series has " + std::to_string(values_.cols()) +
                              " columns, grid has " + std::to_string(grid_.size()) + " points");
    if (values_.rows() < 2) throw ValidationError("series needs n >= 2 time points");
    if (!values_.allFinite()) throw ValidationError("series contains non-finite values");
}

ChangeSpec ChangeSpec::epidemic(double theta1, double theta2, Eigen::VectorXd delta) {
    ChangeSpec c{ChangeKind::epidemic, theta1, theta2, std::move(delta)};
    c.validate();
    return c;
}

ChangeSpec ChangeSpec::amoc(double theta, Eigen::VectorXd delta) {
    ChangeSpec c{ChangeKind::amoc, theta, 1.0, std::move(delta)};
    c.validate();
    return c;
}

void ChangeSpec::validate() const {
    switch (kind) {
        case ChangeKind::none:
            return;
        case ChangeKind::epidemic:
            if (!(theta1 > 0.0 && theta1 < theta2 && theta2 < 1.0))
                throw ValidationError("epidemic change needs 0 < theta1 < theta2 < 1");
            break;
        case ChangeKind::amoc:
            if (!(theta1 > 0.0 && theta1 < 1.0))
                throw ValidationError("AMOC change needs 0 < theta < 1");
            break;
    }
    if (!delta.allFinite()) throw ValidationError("change field contains non-finite values");
}

std::size_t scaled_floor(double theta, std::size_t n) {
    const double v = theta * static_cast<double>(n);
    const double r = std::round(v);
    if (std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v))) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::floor(v));
}

std::pair<std::size_t, std::size_t> shifted_range(const ChangeSpec& change, std::size_t n) {
    switch (change.kind) {
        case ChangeKind::epidemic:
            return {scaled_floor(change.theta1, n), scaled_floor(change.theta2, n)};
        case ChangeKind::amoc:
            return {scaled_floor(change.theta1, n), n};
        case ChangeKind::none:
            break;
    }
    return {n, n};
}

void NoiseSpec::validate(const GridSpec& grid) const {
    if (process == NoiseProcess::ar1 && !(std::abs(coefficient) < 1.0))
        throw ValidationError("AR(1) coefficient must satisfy |rho| < 1");
    if (!std::isfinite(coefficient)) throw ValidationError("noise coefficient must be finite");
    if (static_cast<std::size_t>(latent_basis.cols()) != grid.size())
        throw ValidationError("latent basis does not match the grid size");
    if (channel_sd.size() != latent_basis.rows())
        throw ValidationError("need one channel standard deviation per latent field");
    if ((channel_sd.array() <= 0.0).any() || !channel_sd.allFinite())
        throw ValidationError("channel standard deviations must be positive");
    if (mean.size() != 0 && static_cast<std::size_t>(mean.size()) != grid.size())
        throw ValidationError("mean field does not match the grid size");
    const Eigen::MatrixXd gram = latent_basis * latent_basis.transpose();
    const double err =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (latent_basis.rows() > 0 && err > 1e-10)
        throw ValidationError("latent basis is not orthonormal (max Gram error " +
                              std::to_string(err) + ")");
}

Eigen::VectorXd cosine_vector(std::size_t m, std::size_t k) {
    if (k >= m) throw ValidationError("cosine frequency exceeds axis size");
    Eigen::VectorXd v(m);
    const double scale = k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
    for (std::size_t i = 0; i < m; ++i)
        v[i] = scale * std::cos(std::numbers::pi * (i + 0.5) * k / static_cast<double>(m));
    return v;
}

RowMatrix separable_cosine_basis(const GridSpec& grid, std::span<const std::size_t> per_axis) {
    if (per_axis.size() != grid.rank()) throw ValidationError("need one count per grid axis");
    std::size_t count = 1;
    for (std::size_t a = 0; a < grid.rank(); ++a) {
        if (per_axis[a] == 0 || per_axis[a] > grid.axis_size(a))
            throw ValidationError("per-axis count out of range");
        count *= per_axis[a];
    }

    std::vector<std::vector<Eigen::VectorXd>> axis_vectors(grid.rank());
    for (std::size_t a = 0; a < grid.rank(); ++a)
        for (std::size_t k = 0; k < per_axis[a]; ++k)
            axis_vectors[a].push_back(cosine_vector(grid.axis_size(a), k));

    RowMatrix basis(count, grid.size());
    std::vector<std::size_t> freq(grid.rank(), 0);
    std::vector<std::size_t> coord(grid.rank(), 0);
    for (std::size_t row = 0; row < count; ++row) {
        std::fill(coord.begin(), coord.end(), 0);
        for (std::size_t u = 0; u < grid.size(); ++u) {
            double value = 1.0;
            for (std::size_t a = 0; a < grid.rank(); ++a) value *= axis_vectors[a][freq[a]][coord[a]];
            basis(row, u) = value;
            for (std::size_t a = grid.rank(); a-- > 0;) {
                if (++coord[a] < grid.axis_size(a)) break;
                coord[a] = 0;
            }
        }
        for (std::size_t a = grid.rank(); a-- > 0;) {
            if (++freq[a] < per_axis[a]) break;
            freq[a] = 0;
        }
    }
    return basis;
}

Eigen::MatrixXd simulate_latent_scores(std::size_t n, NoiseProcess process, double coefficient,
                                       const Eigen::VectorXd& channel_sd, std::uint64_t seed) {
    Eigen::MatrixXd scores(n, channel_sd.size());
    for (Eigen::Index l = 0; l < channel_sd.size(); ++l) {
        PhiloxStream rng = make_stream(seed, "latent-noise", static_cast<std::uint64_t>(l));
        const double sd = channel_sd[l];
        switch (process) {
            case NoiseProcess::iid_gaussian:
                for (std::size_t t = 0; t < n; ++t) scores(t, l) = sd * rng.normal();
                break;
            case NoiseProcess::ar1: {
                // Started from the stationary law, so the marginal sd is exactly `sd`.
                const double rho = coefficient;
                const double innovation = sd * std::sqrt(1.0 - rho * rho);
                double x = sd * rng.normal();
                for (std::size_t t = 0; t < n; ++t) {
                    if (t > 0) x = rho * x + innovation * rng.normal();
                    scores(t, l) = x;
                }
                break;
            }
            case NoiseProcess::ma1: {
                const double psi = coefficient;
                const double innovation = sd / std::sqrt(1.0 + psi * psi);
                double previous = rng.normal();
                for (std::size_t t = 0; t < n; ++t) {
                    const double current = rng.normal();
                    scores(t, l) = innovation * (current + psi * previous);
                    previous = current;
                }
                break;
            }
        }
    }
    return scores;
}

FunctionalSeries generate_synthetic(const GridSpec& grid, std::size_t n, const NoiseSpec& noise,
                                    const ChangeSpec& change, std::uint64_t seed) {
    if (n < 2) throw ValidationError("synthetic series needs n >= 2");
    noise.validate(grid);
    change.validate();
    if (change.kind != ChangeKind::none && static_cast<std::size_t>(change.delta.size()) != grid.size())
        throw ValidationError("change field does not match the grid size");

    const Eigen::MatrixXd eta =
        simulate_latent_scores(n, noise.process, noise.coefficient, noise.channel_sd, seed);
    RowMatrix values = eta * noise.latent_basis;
    if (noise.mean.size() != 0) values.rowwise() += noise.mean.transpose();

    if (change.kind != ChangeKind::none) {
        const auto [first, last] = shifted_range(change, n);
        for (std::size_t t = first + 1; t <= last; ++t) values.row(t - 1) += change.delta.transpose();
    }
    return FunctionalSeries(grid, std::move(values));
}

FunctionalSeries detrend_polynomial(const FunctionalSeries& series, int order) {
    if (order < 0) throw ValidationError("detrend order must be non-negative");
    const std::size_t n = series.length();
    const std::size_t p = static_cast<std::size_t>(order) + 1;
    if (n <= p) throw ValidationError("series of length " + std::to_string(n) +
                                      " is too short for a polynomial of order " +
                                      std::to_string(order));

    // Powers of t rescaled to [-1, 1] keep the design well conditioned.
    Eigen::MatrixXd design(n, p);
    for (std::size_t t = 0; t < n; ++t) {
        const double x = n == 1 ? 0.0 : 2.0 * static_cast<double>(t) / static_cast<double>(n - 1) - 1.0;
        double power = 1.0;
        for (std::size_t k = 0; k < p; ++k) {
            design(t, k) = power;
            power *= x;
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);

    RowMatrix residual = series.values();
    const Eigen::MatrixXd coeffs = q.transpose() * residual;
    residual.noalias() -= q * coeffs;
    return FunctionalSeries(series.grid(), std::move(residual));
}

}  // namespace sepcp
