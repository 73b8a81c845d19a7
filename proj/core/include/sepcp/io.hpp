#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sepcp/model.hpp"
#include "sepcp/population.hpp"
#include "sepcp/sepfpca.hpp"

namespace sepcp::io {

/// F4DS v1: one JSON header line
///   {"magic":"F4DS","version":1,"axis_sizes":[...],"n":N,"dtype":"f64-le",
///    "order":"time-major, grid row-major"}
/// followed by n * grid_size little-endian doubles.
void write_f4ds(std::ostream& out, const FunctionalSeries& series);
void write_f4ds(const std::filesystem::path& path, const FunctionalSeries& series);
FunctionalSeries read_f4ds(std::istream& in);
FunctionalSeries read_f4ds(const std::filesystem::path& path);

/// Scores CSV: header `t,c1,...,cd`, then one row per time point (t is 1-based).
void write_scores_csv(std::ostream& out, const ScoreMatrix& scores);
void write_scores_csv(const std::filesystem::path& path, const ScoreMatrix& scores);
ScoreMatrix read_scores_csv(std::istream& in);
ScoreMatrix read_scores_csv(const std::filesystem::path& path);

/// Basis file: one JSON header line
///   {"magic":"F4DB","version":1,"axis_sizes":[...],"d":[...],"eigenvalues":[[...],...],
///    "near_degenerate":[...],"dtype":"f64-le","order":"axis-major, eigenvector-major"}
/// followed, per axis, by d_i eigenvectors of m_i little-endian doubles each.
void write_basis(std::ostream& out, const SeparableBasis& basis);
void write_basis(const std::filesystem::path& path, const SeparableBasis& basis);
SeparableBasis read_basis(std::istream& in);
SeparableBasis read_basis(const std::filesystem::path& path);

/// 1-D density or EDF as `x,value` rows; 2-D as long-format `x,y,value` rows.
void write_density_csv(std::ostream& out, const DensityEstimate& estimate);
void write_density_csv(const std::filesystem::path& path, const DensityEstimate& estimate);

/// Round-trip decimal text for a double (shortest representation that parses back exactly).
std::string format_double(double x);

}  // namespace sepcp::io
