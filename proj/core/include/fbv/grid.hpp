#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "fbv/numeric.hpp"
#include "fbv/point.hpp"

namespace fbv::grid {

inline constexpr int kMaxGridDim = 3;

/// Node-centred uniform grid on a box in R^dim, dim <= 3. Nodes include both
/// box ends along every axis; flat indices run with the last axis fastest.
struct UniformGrid {
  int dim = 0;
  std::array<double, kMaxGridDim> lo{};
  std::array<double, kMaxGridDim> hi{};
  std::array<int, kMaxGridDim> count{};

  UniformGrid() = default;
  UniformGrid(std::vector<double> lower, std::vector<double> upper, std::vector<int> counts);

  double spacing(int axis) const { return (hi[axis] - lo[axis]) / (count[axis] - 1); }
  size_t size() const;
  size_t flat(std::array<int, kMaxGridDim> idx) const;
  std::array<int, kMaxGridDim> unflat(size_t flat_index) const;
  Point node(size_t flat_index) const;
  /// Trapezoid weight of a node (product of 1-D trapezoid weights).
  double trapezoid_weight(size_t flat_index) const;
};

/// Complex samples on a uniform grid with multilinear interpolation.
class GridField {
 public:
  GridField() = default;
  GridField(UniformGrid grid, std::vector<cplx> samples);
  template <class Fn>
  static GridField sample(const UniformGrid& grid, Fn&& fn) {
    std::vector<cplx> s(grid.size());
    for (size_t i = 0; i < s.size(); ++i) s[i] = fn(grid.node(i));
    return GridField(grid, std::move(s));
  }

  const UniformGrid& grid() const { return grid_; }
  const std::vector<cplx>& samples() const { return samples_; }
  cplx operator[](size_t i) const { return samples_[i]; }

  /// Multilinear interpolation; zero outside the grid box.
  cplx interpolate(const Point& p) const;

 private:
  UniformGrid grid_;
  std::vector<cplx> samples_;
};

enum class Encoding { kCsv, kBinary };

/// Optional support box recorded in the header.
struct SupportBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Writes one JSON header line followed by the samples, either as CSV rows
/// (x_1..x_dim, re, im) or as raw little-endian (re, im) doubles.
void write_grid(const std::filesystem::path& path, const GridField& field, Encoding encoding,
                const SupportBox& support = {});
GridField read_grid(const std::filesystem::path& path, SupportBox* support = nullptr);

}  // namespace fbv::grid
