#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sfs/errors.hpp"
#include "sfs/vec.hpp"

namespace sfs {

//! Rectangular node lattice. Index i runs along x, j along y, and node (i, j)
//! sits at (x0 + i * dx, y0 + j * dy).
class Grid {
 public:
  Grid(std::size_t nx, std::size_t ny, double dx, double dy, double x0, double y0)
      : nx_(nx), ny_(ny), dx_(dx), dy_(dy), x0_(x0), y0_(y0) {
    if (nx < 2 || ny < 2) throw InvalidArgument("grid needs at least 2x2 nodes");
    if (!(dx > 0.0) || !(dy > 0.0)) throw InvalidArgument("grid spacing must be positive");
  }

  //! Grid covering [-width/2, width/2] x [-height/2, height/2].
  static Grid centered(std::size_t nx, std::size_t ny, double width, double height) {
    if (nx < 2 || ny < 2) throw InvalidArgument("grid needs at least 2x2 nodes");
    return Grid(nx, ny, width / static_cast<double>(nx - 1),
                height / static_cast<double>(ny - 1), -0.5 * width, -0.5 * height);
  }

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }
  double x0() const noexcept { return x0_; }
  double y0() const noexcept { return y0_; }
  double extent_x() const noexcept { return static_cast<double>(nx_ - 1) * dx_; }
  double extent_y() const noexcept { return static_cast<double>(ny_ - 1) * dy_; }

  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx_ + i; }
  std::pair<std::size_t, std::size_t> coords(std::size_t k) const noexcept {
    return {k % nx_, k / nx_};
  }

  Vec2 position(std::size_t i, std::size_t j) const noexcept {
    return {x0_ + static_cast<double>(i) * dx_, y0_ + static_cast<double>(j) * dy_};
  }

  bool on_edge(std::size_t i, std::size_t j) const noexcept {
    return i == 0 || j == 0 || i + 1 == nx_ || j + 1 == ny_;
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t nx_;
  std::size_t ny_;
  double dx_;
  double dy_;
  double x0_;
  double y0_;
};

//! One value per grid node, stored row-major in j.
template <typename T>
class Field {
 public:
  using value_type = T;

  explicit Field(const Grid& grid, T fill = T{}) : grid_(grid), values_(grid.size(), fill) {}
  Field(const Grid& grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw InvalidArgument("field size does not match grid");
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  T& operator()(std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; }
  const T& operator()(std::size_t i, std::size_t j) const { return values_[grid_.index(i, j)]; }
  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

 private:
  Grid grid_;
  std::vector<T> values_;
};

using ScalarField = Field<double>;

enum class NodeLabel : std::uint8_t { Inside, Outside, Boundary };

using Mask = Field<NodeLabel>;

//! Labels nodes from a per-node membership flag: flagged nodes away from the
//! grid edge are Inside, flagged edge nodes are Boundary, and unflagged nodes
//! with an Inside 4-neighbour are Boundary.
inline Mask build_mask_from_flags(const Grid& grid, std::span<const std::uint8_t> flags) {
  if (flags.size() != grid.size()) throw InvalidArgument("flag count does not match grid");
  Mask mask(grid, NodeLabel::Outside);
  const std::size_t nx = grid.nx();
  const std::size_t ny = grid.ny();
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      if (!flags[grid.index(i, j)]) continue;
      mask(i, j) = grid.on_edge(i, j) ? NodeLabel::Boundary : NodeLabel::Inside;
    }
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      if (mask(i, j) != NodeLabel::Outside) continue;
      const bool touches = (i > 0 && mask(i - 1, j) == NodeLabel::Inside) ||
                           (i + 1 < nx && mask(i + 1, j) == NodeLabel::Inside) ||
                           (j > 0 && mask(i, j - 1) == NodeLabel::Inside) ||
                           (j + 1 < ny && mask(i, j + 1) == NodeLabel::Inside);
      if (touches) mask(i, j) = NodeLabel::Boundary;
    }
  return mask;
}

template <typename Predicate>
Mask build_mask_from_predicate(const Grid& grid, Predicate&& inside) {
  std::vector<std::uint8_t> flags(grid.size(), 0);
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i)
      flags[grid.index(i, j)] = inside(grid.position(i, j)) ? 1 : 0;
  return build_mask_from_flags(grid, flags);
}

inline std::size_t count_label(const Mask& mask, NodeLabel label) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), label));
}

//! Indices of Inside nodes in storage order.
inline std::vector<std::size_t> inside_nodes(const Mask& mask) {
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < mask.size(); ++k)
    if (mask[k] == NodeLabel::Inside) nodes.push_back(k);
  return nodes;
}

struct Gradient {
  ScalarField dx;
  ScalarField dy;
};

namespace detail {

// Central difference when both neighbours are usable, one-sided otherwise.
// A neighbour is unusable when it is off the grid or Outside the mask.
inline double directional_difference(double minus, double centre, double plus, bool has_minus,
                                     bool has_plus, double step) {
  if (has_minus && has_plus) return (plus - minus) / (2.0 * step);
  if (has_plus) return (plus - centre) / step;
  if (has_minus) return (centre - minus) / step;
  return 0.0;
}

}  // namespace detail

inline Gradient gradient_central(const ScalarField& field, const Mask& mask) {
  const Grid& g = field.grid();
  if (!(mask.grid() == g)) throw InvalidArgument("mask and field grids differ");
  Gradient grad{ScalarField(g, 0.0), ScalarField(g, 0.0)};
  const std::size_t nx = g.nx();
  const std::size_t ny = g.ny();
  auto usable = [&](std::size_t i, std::size_t j) { return mask(i, j) != NodeLabel::Outside; };
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double c = field(i, j);
      const bool has_w = i > 0 && usable(i - 1, j);
      const bool has_e = i + 1 < nx && usable(i + 1, j);
      const bool has_s = j > 0 && usable(i, j - 1);
      const bool has_n = j + 1 < ny && usable(i, j + 1);
      grad.dx(i, j) = detail::directional_difference(has_w ? field(i - 1, j) : c, c,
                                                     has_e ? field(i + 1, j) : c, has_w, has_e,
                                                     g.dx());
      grad.dy(i, j) = detail::directional_difference(has_s ? field(i, j - 1) : c, c,
                                                     has_n ? field(i, j + 1) : c, has_s, has_n,
                                                     g.dy());
    }
  return grad;
}

}  // namespace sfs
