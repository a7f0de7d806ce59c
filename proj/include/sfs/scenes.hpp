#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

#include "sfs/errors.hpp"
#include "sfs/grid.hpp"

namespace sfs {

//! Ground truth for a synthetic benchmark. Inside nodes carry the closed-form
//! height and every other node zero, except for scenes with a known rim
//! height (the vase), whose Boundary nodes carry it and which expose it as
//! `boundary` for Dirichlet data.
struct Scene {
  ScalarField height;
  Mask mask;
  std::optional<ScalarField> boundary;
};

namespace detail {

template <typename Predicate, typename Height>
Scene make_scene(const Grid& grid, Predicate&& inside, Height&& height) {
  Mask mask = build_mask_from_predicate(grid, inside);
  ScalarField u(grid, 0.0);
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i)
      if (mask(i, j) == NodeLabel::Inside) u(i, j) = height(grid.position(i, j));
  return {std::move(u), std::move(mask), std::nullopt};
}

}  // namespace detail

/// Hemisphere of radius min(X, Y)/2 + 2 max(dx, dy), centred on the grid.
inline double sphere_radius(const Grid& grid) {
  return 0.5 * std::min(grid.extent_x(), grid.extent_y()) + 2.0 * std::max(grid.dx(), grid.dy());
}

inline Scene make_sphere(const Grid& grid) {
  const double r = sphere_radius(grid);
  const double cx = grid.x0() + 0.5 * grid.extent_x();
  const double cy = grid.y0() + 0.5 * grid.extent_y();
  return detail::make_scene(
      grid,
      [&](Vec2 p) {
        const double x = p.x - cx, y = p.y - cy;
        return x * x + y * y <= r * r;
      },
      [&](Vec2 p) {
        const double x = p.x - cx, y = p.y - cy;
        return std::sqrt(std::max(0.0, r * r - x * x - y * y));
      });
}

/// Ridge tent min(-2|x| + 4X/5, -|y| + 2Y/5) on |x|/X, |y|/Y < 2/5.
inline Scene make_tent(const Grid& grid) {
  const double wx = grid.extent_x();
  const double wy = grid.extent_y();
  const double cx = grid.x0() + 0.5 * wx;
  const double cy = grid.y0() + 0.5 * wy;
  return detail::make_scene(
      grid,
      [&](Vec2 p) { return std::abs(p.x - cx) / wx < 0.4 && std::abs(p.y - cy) / wy < 0.4; },
      [&](Vec2 p) {
        return std::min(-2.0 * std::abs(p.x - cx) + 0.8 * wx, -std::abs(p.y - cy) + 0.4 * wy);
      });
}

enum class BasinForm { Printed, Radial };

/// 1 - (1 - s)^2 on x^2 + y^2 < 2, where s = x^2 - y^2 (printed) or
/// x^2 + y^2 (radial).
inline double basin_height(Vec2 p, BasinForm form) {
  const double s = form == BasinForm::Printed ? p.x * p.x - p.y * p.y : p.x * p.x + p.y * p.y;
  return 1.0 - (1.0 - s) * (1.0 - s);
}

inline Scene make_basin(const Grid& grid, BasinForm form = BasinForm::Printed) {
  return detail::make_scene(
      grid, [](Vec2 p) { return p.x * p.x + p.y * p.y < 2.0; },
      [form](Vec2 p) { return basin_height(p, form); });
}

//! Grid for the basin benchmark: [-1.5, 1.5]^2 with 151 x 151 nodes.
inline Grid basin_grid() { return Grid::centered(151, 151, 3.0, 3.0); }

/// 0.5 + 0.5 sin(pi x / lx) sin(pi y / ly) over the grid interior. The
/// wavelengths default to the grid spacing.
inline Scene make_sinusoid(const Grid& grid, std::optional<double> wavelength_x = std::nullopt,
                           std::optional<double> wavelength_y = std::nullopt) {
  const double lx = wavelength_x.value_or(grid.dx());
  const double ly = wavelength_y.value_or(grid.dy());
  if (!(lx > 0.0) || !(ly > 0.0)) throw InvalidArgument("sinusoid wavelengths must be positive");
  const double pi = std::numbers::pi;
  return detail::make_scene(
      grid, [](Vec2) { return true; },
      [=](Vec2 p) { return 0.5 + 0.5 * std::sin(pi * p.x / lx) * std::sin(pi * p.y / ly); });
}

/// Vase profile P(t) = (-10.8 t^6 + 7.2 t^5 + 6.6 t^4 - 3.8 t^3 - 1.375 t^2
/// + 0.5 t + 0.25) X with t = y / Y.
inline double vase_profile(double t, double width) {
  const double poly =
      ((((((-10.8 * t + 7.2) * t + 6.6) * t - 3.8) * t - 1.375) * t + 0.5) * t + 0.25);
  return poly * width;
}

/// Solid of rotation sqrt(P(y/Y)^2 - x^2) on P^2 > x^2. The boundary field is
/// the closed form clamped at zero: the exact rim height on Boundary nodes.
inline Scene make_vase(const Grid& grid) {
  const double wx = grid.extent_x();
  const double wy = grid.extent_y();
  const double cx = grid.x0() + 0.5 * wx;
  const double cy = grid.y0() + 0.5 * wy;
  auto half_width = [=](Vec2 p) { return vase_profile((p.y - cy) / wy, wx); };
  auto closed_form = [=](Vec2 p) {
    const double r = half_width(p);
    return std::sqrt(std::max(0.0, r * r - (p.x - cx) * (p.x - cx)));
  };
  Scene scene = detail::make_scene(
      grid,
      [=](Vec2 p) {
        const double r = half_width(p);
        return r * r > (p.x - cx) * (p.x - cx);
      },
      closed_form);
  ScalarField rim(grid, 0.0);
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      if (scene.mask(i, j) == NodeLabel::Inside) continue;
      rim(i, j) = closed_form(grid.position(i, j));
      scene.height(i, j) = rim(i, j);
    }
  scene.boundary = std::move(rim);
  return scene;
}

// ---------------------------------------------------------------------------
// Scene selection by name

struct SphereScene {};
struct TentScene {};
struct BasinScene {
  BasinForm form{BasinForm::Printed};
};
struct SinusoidScene {
  std::optional<double> wavelength_x;
  std::optional<double> wavelength_y;
};
struct VaseScene {};

using SceneKind = std::variant<SphereScene, TentScene, BasinScene, SinusoidScene, VaseScene>;

struct SceneSpec {
  SceneKind kind;
  Grid grid;
};

inline Scene make_scene(const SceneSpec& spec) {
  return std::visit(
      [&](const auto& k) -> Scene {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SphereScene>) return make_sphere(spec.grid);
        else if constexpr (std::is_same_v<K, TentScene>) return make_tent(spec.grid);
        else if constexpr (std::is_same_v<K, BasinScene>) return make_basin(spec.grid, k.form);
        else if constexpr (std::is_same_v<K, SinusoidScene>)
          return make_sinusoid(spec.grid, k.wavelength_x, k.wavelength_y);
        else return make_vase(spec.grid);
      },
      spec.kind);
}

}  // namespace sfs
