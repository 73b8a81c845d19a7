#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sepcp {

/// Estimated (and optionally true) change locations and durations across subjects.
struct ChangePointSample {
    std::vector<double> location;  ///< theta1_j
    std::vector<double> duration;  ///< tau_j = theta2_j - theta1_j
    std::optional<std::vector<double>> true_location;
    std::optional<std::vector<double>> true_duration;

    std::size_t size() const noexcept { return location.size(); }
    void validate() const;
};

enum class KernelType { gaussian, epanechnikov };
enum class BoundaryMode { none, reflect };

std::string_view to_string(KernelType k);
KernelType parse_kernel(std::string_view text);

/// Density of the standardized kernel K(x).
double kernel_density(KernelType kernel, double x) noexcept;
/// Integral of K from -infinity to x.
double kernel_cdf(KernelType kernel, double x) noexcept;

/// Tabulated estimate for export: values on `x` (and `y` for 2-D, stored with y fastest).
struct DensityEstimate {
    enum class Kind { edf, kde_1d, kde_2d };
    Kind kind = Kind::edf;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> values;
    std::vector<double> bandwidths;
    std::string kernel;
    BoundaryMode boundary = BoundaryMode::none;
    /// Average fraction of kernel mass falling outside [0, 1] (per axis for 2-D).
    std::vector<double> boundary_mass;
};

/// Right-continuous empirical distribution function F(x) = (1/m) #{x_j <= x}.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::span<const double> sample);
    double operator()(double x) const noexcept;
    std::size_t size() const noexcept { return sorted_.size(); }
    const std::vector<double>& sorted() const noexcept { return sorted_; }
    DensityEstimate tabulate(std::span<const double> grid) const;

private:
    std::vector<double> sorted_;
};

/// Shorthand for EmpiricalCdf(sample).tabulate(grid).
DensityEstimate edf(std::span<const double> sample, std::span<const double> grid);

/// f(x) = 1/(m h) sum K((x - x_i)/h), optionally reflected at 0 and 1.
class Kde1d {
public:
    Kde1d(std::span<const double> sample, double bandwidth, KernelType kernel = KernelType::gaussian,
          BoundaryMode boundary = BoundaryMode::none);
    double operator()(double x) const noexcept;
    double bandwidth() const noexcept { return h_; }
    /// Mean kernel mass outside [0, 1] before any reflection.
    double boundary_mass() const noexcept;
    DensityEstimate tabulate(std::span<const double> grid) const;

private:
    std::vector<double> sample_;
    double h_;
    KernelType kernel_;
    BoundaryMode boundary_;
};

DensityEstimate kde_1d(std::span<const double> sample, double bandwidth, std::span<const double> grid,
                       KernelType kernel = KernelType::gaussian, BoundaryMode boundary = BoundaryMode::none);

/// Product-kernel 2-D estimate f(x,y) = 1/(m h1 h2) sum K((x-x_i)/h1) K((y-y_i)/h2).
class Kde2d {
public:
    Kde2d(std::span<const double> xs, std::span<const double> ys, double h1, double h2,
          KernelType kernel = KernelType::gaussian, BoundaryMode boundary = BoundaryMode::none);
    double operator()(double x, double y) const noexcept;
    std::pair<double, double> bandwidths() const noexcept { return {h1_, h2_}; }
    std::pair<double, double> boundary_mass() const noexcept;
    DensityEstimate tabulate(std::span<const double> gx, std::span<const double> gy) const;

private:
    std::vector<double> xs_, ys_;
    double h1_, h2_;
    KernelType kernel_;
    BoundaryMode boundary_;
};

DensityEstimate kde_2d(std::span<const double> xs, std::span<const double> ys, double h1, double h2,
                       std::span<const double> gx, std::span<const double> gy,
                       KernelType kernel = KernelType::gaussian, BoundaryMode boundary = BoundaryMode::none);

/// h = 0.9 min(sd, IQR / 1.34) m^(-1/5).
double silverman_bandwidth(std::span<const double> sample);

/// Fixed (h_location, h_duration) of the `paper-defaults` KDE preset.
inline constexpr std::pair<double, double> kPresetBandwidths{0.04, 0.05};

/// `count` equally spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Largest absolute difference between two EDFs (evaluated at all jump points).
double sup_distance(const EmpiricalCdf& a, const EmpiricalCdf& b);

/// sqrt(sum (f - g)^2 dx) on a uniform grid.
double l2_grid_distance(std::span<const double> f, std::span<const double> g, double dx);

}  // namespace sepcp
