#include "sepcp/population.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sepcp/error.hpp"

namespace sepcp {
namespace {

void check_unit_interval(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(std::string(what) + " values must lie in [0, 1]");
}

double quantile_sorted(const std::vector<double>& s, double p) {
    // Linear interpolation between order statistics (type 7).
    const double pos = p * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

// Kernel mass of a point at `center` with bandwidth h that falls outside [0, 1].
double outside_mass(KernelType kernel, double center, double h) {
    return kernel_cdf(kernel, (0.0 - center) / h) + (1.0 - kernel_cdf(kernel, (1.0 - center) / h));
}

double reflected_sum(KernelType kernel, BoundaryMode boundary, double x, double center, double h) {
    double k = kernel_density(kernel, (x - center) / h);
    if (boundary == BoundaryMode::reflect) {
        if (x < 0.0 || x > 1.0) return 0.0;
        k += kernel_density(kernel, (x + center) / h);
        k += kernel_density(kernel, (x - (2.0 - center)) / h);
    }
    return k;
}

void check_bandwidth(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("bandwidth must be positive");
}

}  // namespace

void ChangePointSample::validate() const {
    if (location.size() != duration.size())
        throw ValidationError("location and duration samples differ in length");
    check_unit_interval(location, "location");
    check_unit_interval(duration, "duration");
    for (std::size_t j = 0; j < location.size(); ++j)
        if (duration[j] > 1.0 - location[j] + 1e-12)
            throw ValidationError("duration exceeds 1 - location for subject " + std::to_string(j));
    if (true_location && true_location->size() != location.size())
        throw ValidationError("true locations do not match the sample size");
    if (true_duration && true_duration->size() != duration.size())
        throw ValidationError("true durations do not match the sample size");
}

std::string_view to_string(KernelType k) { return k == KernelType::gaussian ? "gaussian" : "epanechnikov"; }

KernelType parse_kernel(std::string_view text) {
    if (text == "gaussian") return KernelType::gaussian;
    if (text == "epanechnikov") return KernelType::epanechnikov;
    throw ValidationError("unknown kernel '" + std::string(text) + "'");
}

double kernel_density(KernelType kernel, double x) noexcept {
    switch (kernel) {
        case KernelType::gaussian:
            return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        case KernelType::epanechnikov:
            return std::abs(x) < 1.0 ? 0.75 * (1.0 - x * x) : 0.0;
    }
    return 0.0;
}

double kernel_cdf(KernelType kernel, double x) noexcept {
    switch (kernel) {
        case KernelType::gaussian:
            return 0.5 * std::erfc(-x / std::numbers::sqrt2);
        case KernelType::epanechnikov:
            if (x <= -1.0) return 0.0;
            if (x >= 1.0) return 1.0;
            return 0.5 + 0.75 * x - 0.25 * x * x * x;
    }
    return 0.0;
}

EmpiricalCdf::EmpiricalCdf(std::span<const double> sample) : sorted_(sample.begin(), sample.end()) {
    if (sorted_.empty()) throw ValidationError("empirical distribution needs at least one observation");
    for (double x : sorted_)
        if (!std::isfinite(x)) throw ValidationError("sample contains non-finite values");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const noexcept {
    const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

DensityEstimate EmpiricalCdf::tabulate(std::span<const double> grid) const {
    DensityEstimate out;
    out.kind = DensityEstimate::Kind::edf;
    out.x.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    for (double x : grid) out.values.push_back((*this)(x));
    return out;
}

DensityEstimate edf(std::span<const double> sample, std::span<const double> grid) {
    return EmpiricalCdf(sample).tabulate(grid);
}

Kde1d::Kde1d(std::span<const double> sample, double bandwidth, KernelType kernel, BoundaryMode boundary)
    : sample_(sample.begin(), sample.end()), h_(bandwidth), kernel_(kernel), boundary_(boundary) {
    check_bandwidth(h_);
    if (sample_.empty()) throw ValidationError("kernel density estimate needs at least one observation");
}

double Kde1d::operator()(double x) const noexcept {
    double s = 0.0;
    for (double c : sample_) s += reflected_sum(kernel_, boundary_, x, c, h_);
    return s / (static_cast<double>(sample_.size()) * h_);
}

double Kde1d::boundary_mass() const noexcept {
    double s = 0.0;
    for (double c : sample_) s += outside_mass(kernel_, c, h_);
    return s / static_cast<double>(sample_.size());
}

DensityEstimate Kde1d::tabulate(std::span<const double> grid) const {
    DensityEstimate out;
    out.kind = DensityEstimate::Kind::kde_1d;
    out.x.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    for (double x : grid) out.values.push_back((*this)(x));
    out.bandwidths = {h_};
    out.kernel = std::string(to_string(kernel_));
    out.boundary = boundary_;
    out.boundary_mass = {boundary_mass()};
    return out;
}

DensityEstimate kde_1d(std::span<const double> sample, double bandwidth, std::span<const double> grid,
                       KernelType kernel, BoundaryMode boundary) {
    return Kde1d(sample, bandwidth, kernel, boundary).tabulate(grid);
}

Kde2d::Kde2d(std::span<const double> xs, std::span<const double> ys, double h1, double h2, KernelType kernel,
             BoundaryMode boundary)
    : xs_(xs.begin(), xs.end()), ys_(ys.begin(), ys.end()), h1_(h1), h2_(h2), kernel_(kernel), boundary_(boundary) {
    check_bandwidth(h1_);
    check_bandwidth(h2_);
    if (xs_.empty() || xs_.size() != ys_.size())
        throw ValidationError("2-D kernel density estimate needs paired, non-empty samples");
}

double Kde2d::operator()(double x, double y) const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i)
        s += reflected_sum(kernel_, boundary_, x, xs_[i], h1_) * reflected_sum(kernel_, boundary_, y, ys_[i], h2_);
    return s / (static_cast<double>(xs_.size()) * h1_ * h2_);
}

std::pair<double, double> Kde2d::boundary_mass() const noexcept {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        sx += outside_mass(kernel_, xs_[i], h1_);
        sy += outside_mass(kernel_, ys_[i], h2_);
    }
    const double m = static_cast<double>(xs_.size());
    return {sx / m, sy / m};
}

DensityEstimate Kde2d::tabulate(std::span<const double> gx, std::span<const double> gy) const {
    DensityEstimate out;
    out.kind = DensityEstimate::Kind::kde_2d;
    out.x.assign(gx.begin(), gx.end());
    out.y.assign(gy.begin(), gy.end());
    out.values.reserve(gx.size() * gy.size());
    for (double x : gx)
        for (double y : gy) out.values.push_back((*this)(x, y));
    out.bandwidths = {h1_, h2_};
    out.kernel = std::string(to_string(kernel_));
    out.boundary = boundary_;
    const auto [bx, by] = boundary_mass();
    out.boundary_mass = {bx, by};
    return out;
}

DensityEstimate kde_2d(std::span<const double> xs, std::span<const double> ys, double h1, double h2,
                       std::span<const double> gx, std::span<const double> gy, KernelType kernel,
                       BoundaryMode boundary) {
    return Kde2d(xs, ys, h1, h2, kernel, boundary).tabulate(gx, gy);
}

double silverman_bandwidth(std::span<const double> sample) {
    const std::size_t m = sample.size();
    if (m < 2) throw ValidationError("bandwidth selection needs at least two observations");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double x : s) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m - 1));
    if (s.front() == s.back() || !(sd > 0.0))
        throw ValidationError("bandwidth selection needs a non-constant sample");
    const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 0.9 * spread * std::pow(static_cast<double>(m), -0.2);
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count < 2) throw ValidationError("linspace needs at least two points");
    std::vector<double> out(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

double sup_distance(const EmpiricalCdf& a, const EmpiricalCdf& b) {
    // Both functions are step functions, so the supremum is attained at a jump.
    double best = 0.0;
    for (const auto* s : {&a.sorted(), &b.sorted()})
        for (double x : *s) best = std::max(best, std::abs(a(x) - b(x)));
    return best;
}

double l2_grid_distance(std::span<const double> f, std::span<const double> g, double dx) {
    if (f.size() != g.size()) throw ValidationError("density grids differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - g[i]) * (f[i] - g[i]);
    return std::sqrt(s * dx);
}

}  // namespace sepcp
