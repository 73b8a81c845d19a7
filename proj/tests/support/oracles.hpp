#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Each one recomputes a library quantity by the most literal route
// available (no prefix sums, no mode products, no library eigensolver where
// avoidable), so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sepcp/model.hpp"
#include "sepcp/sepfpca.hpp"

namespace sepcp::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(rng);
    return m;
}

inline FunctionalSeries random_series(std::mt19937_64& rng, std::vector<std::size_t> axes, std::size_t n) {
    GridSpec grid(std::move(axes));
    RowMatrix values = random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
    return FunctionalSeries(grid, values);
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index m) {
    const Eigen::MatrixXd a = random_matrix(rng, m, m);
    return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(m, m);
}

inline double relative_gap(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// ---------------------------------------------------------------- covariance

/// Full empirical covariance over the flattened grid, (1/n) sum_t dev_t dev_t^T.
inline Eigen::MatrixXd full_empirical_covariance(const FunctionalSeries& s) {
    const auto& x = s.values();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const auto g = static_cast<Eigen::Index>(s.grid().size());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(g, g);
    for (Eigen::Index t = 0; t < x.rows(); ++t)
        for (Eigen::Index u = 0; u < g; ++u)
            for (Eigen::Index v = 0; v < g; ++v) c(u, v) += (x(t, u) - mean[u]) * (x(t, v) - mean[v]);
    return c / static_cast<double>(x.rows());
}

/// Integrates a grid covariance over every axis but `axis`, averaging the
/// diagonal blocks where the other coordinates coincide.
inline Eigen::MatrixXd integrate_to_axis(const Eigen::MatrixXd& c, const GridSpec& grid, std::size_t axis) {
    const std::size_t m = grid.axis_size(axis);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    std::vector<std::size_t> coords(grid.rank(), 0);
    std::size_t others = 0;
    // Enumerate every coordinate with axis fixed at 0, then vary the axis.
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t a = grid.rank(); a-- > 0;) {
            coords[a] = rem % grid.axis_size(a);
            rem /= grid.axis_size(a);
        }
        if (coords[axis] != 0) continue;
        ++others;
        for (std::size_t u = 0; u < m; ++u)
            for (std::size_t s = 0; s < m; ++s) {
                auto cu = coords, cs = coords;
                cu[axis] = u;
                cs[axis] = s;
                out(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(s)) +=
                    c(static_cast<Eigen::Index>(grid.flat_index(cu)), static_cast<Eigen::Index>(grid.flat_index(cs)));
            }
    }
    return out / static_cast<double>(others);
}

// ---------------------------------------------------------------- spectra

/// Characteristic polynomial det(A - x I) by cofactor expansion with
/// polynomial entries; coefficients in increasing degree.
inline std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& a) {
    using Poly = std::vector<double>;
    auto mul = [](const Poly& p, const Poly& q) {
        Poly r(p.size() + q.size() - 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
        return r;
    };
    auto add = [](Poly p, const Poly& q, double sign) {
        if (p.size() < q.size()) p.resize(q.size(), 0.0);
        for (std::size_t i = 0; i < q.size(); ++i) p[i] += sign * q[i];
        return p;
    };
    const auto n = static_cast<std::size_t>(a.rows());
    std::vector<std::vector<Poly>> m(n, std::vector<Poly>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m[i][j] = i == j ? Poly{a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), -1.0}
                             : Poly{a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))};

    // Expansion along the first remaining row over the remaining columns.
    auto det = [&](auto&& self, std::size_t row, std::vector<std::size_t>& cols) -> Poly {
        if (row == n) return Poly{1.0};
        Poly total{0.0};
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const std::size_t c = cols[k];
            cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(k));
            const Poly minor = self(self, row + 1, cols);
            cols.insert(cols.begin() + static_cast<std::ptrdiff_t>(k), c);
            total = add(total, mul(m[row][c], minor), k % 2 == 0 ? 1.0 : -1.0);
        }
        return total;
    };
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    return det(det, 0, cols);
}

/// Real roots of a polynomial with only simple real roots inside [-bound, bound],
/// by sign-change scanning and bisection. Descending order.
inline std::vector<double> real_roots(const std::vector<double>& p, double bound, std::size_t cells = 200000) {
    auto eval = [&](double x) {
        double v = 0.0;
        for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
        return v;
    };
    std::vector<double> roots;
    const double step = 2.0 * bound / static_cast<double>(cells);
    double lo = -bound, flo = eval(lo);
    for (std::size_t i = 1; i <= cells; ++i) {
        const double hi = -bound + step * static_cast<double>(i);
        const double fhi = eval(hi);
        if (flo == 0.0) {
            roots.push_back(lo);
        } else if (flo * fhi < 0.0) {
            double a = lo, b = hi, fa = flo;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = eval(mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        lo = hi;
        flo = fhi;
    }
    std::sort(roots.rbegin(), roots.rend());
    return roots;
}

inline Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
}

// ---------------------------------------------------------------- statistics

struct BruteScan {
    double sum = 0.0;
    double max = 0.0;
    std::size_t k1 = 0;
    std::size_t k2 = 0;
};

/// Studentized sum/max statistics and the change-point argmax recomputed
/// with explicit segment sums for every pair (no prefix table).
inline BruteScan brute_force_scan(const Eigen::MatrixXd& eta, const Eigen::VectorXd& gamma2, bool amoc = false) {
    const auto n = static_cast<std::size_t>(eta.rows());
    const auto d = static_cast<std::size_t>(eta.cols());
    const Eigen::RowVectorXd mean = eta.colwise().mean();
    auto q = [&](std::size_t k1, std::size_t k2) {
        double total = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            double s = 0.0;
            for (std::size_t t = k1 + 1; t <= k2; ++t)
                s += eta(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(l)) - mean[static_cast<Eigen::Index>(l)];
            total += s * s / gamma2[static_cast<Eigen::Index>(l)];
        }
        return total;
    };
    BruteScan out;
    const double nd = static_cast<double>(n);
    std::vector<std::vector<double>> grid(n + 1, std::vector<double>(n + 1, -1.0));
    for (std::size_t k1 = 0; k1 < n; ++k1)
        for (std::size_t k2 = amoc ? n : k1 + 1; k2 <= n; ++k2) {
            grid[k1][k2] = q(k1, k2);
            if (k1 >= 1) {
                out.sum += grid[k1][k2];
                out.max = std::max(out.max, grid[k1][k2] / nd);
            }
        }
    out.sum /= amoc ? nd * nd : nd * nd * nd;

    double best = 0.0;
    for (const auto& row : grid)
        for (double v : row) best = std::max(best, v);
    const double cut = best * (1.0 - 1e-12);
    for (std::size_t k1 = 0; k1 < n; ++k1) {
        std::size_t y = 0;
        for (std::size_t k2 = n; k2 > k1; --k2)
            if (grid[k1][k2] >= cut) {
                y = k2;
                break;
            }
        if (y > 0) {
            out.k1 = k1;
            out.k2 = y;
            return out;
        }
    }
    return out;
}

/// Exhaustive argmax of |S(k1, k2)| for one component, 1 <= k1 < k2 <= n,
/// smallest k1 then largest k2.
inline std::pair<std::size_t, std::size_t> brute_component_change(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double best = -1.0;
    std::pair<std::size_t, std::size_t> arg{1, n};
    for (std::size_t k1 = 1; k1 < n; ++k1)
        for (std::size_t k2 = n; k2 > k1; --k2) {
            double s = 0.0;
            for (std::size_t t = k1 + 1; t <= k2; ++t) s += x[t - 1] - mean;
            if (std::abs(s) > best * (1.0 + 1e-12) + 1e-300) {
                best = std::abs(s);
                arg = {k1, k2};
            }
        }
    return arg;
}

// ---------------------------------------------------------------- FDR

/// Benjamini-Hochberg by definition: try every cutoff i = m..1 on the sorted
/// list and keep the largest that satisfies p_(i) <= i q / m.
inline std::vector<bool> brute_bh(const std::vector<double>& p, double q) {
    const std::size_t m = p.size();
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    std::size_t cutoff = 0;
    for (std::size_t i = m; i >= 1; --i)
        if (sorted[i - 1] <= static_cast<double>(i) * q / static_cast<double>(m)) {
            cutoff = i;
            break;
        }
    std::vector<bool> out(m, false);
    if (cutoff == 0) return out;
    const double pk = sorted[cutoff - 1];
    for (std::size_t j = 0; j < m; ++j) out[j] = p[j] <= pk;
    return out;
}

// ---------------------------------------------------------------- limits

/// Draws from sup_{0<=x<y<=1} (B(y) - B(x))^2 for a Brownian bridge B,
/// i.e. (max B - min B)^2, approximated on `steps` grid points.
inline std::vector<double> bridge_range_squared(std::size_t draws, std::size_t steps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> out(draws);
    std::vector<double> w(steps + 1);
    const double dt = 1.0 / static_cast<double>(steps);
    for (std::size_t r = 0; r < draws; ++r) {
        w[0] = 0.0;
        for (std::size_t i = 1; i <= steps; ++i) w[i] = w[i - 1] + std::sqrt(dt) * z(rng);
        double hi = 0.0, lo = 0.0;
        for (std::size_t i = 0; i <= steps; ++i) {
            const double b = w[i] - dt * static_cast<double>(i) * w[steps];
            hi = std::max(hi, b);
            lo = std::min(lo, b);
        }
        out[r] = (hi - lo) * (hi - lo);
    }
    return out;
}

inline double empirical_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return empirical_quantile(std::move(v), 0.5); }

}  // namespace sepcp::testing
