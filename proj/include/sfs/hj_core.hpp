#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "sfs/errors.hpp"
#include "sfs/grid.hpp"
#include "sfs/reflectance.hpp"
#include "sfs/vec.hpp"

namespace sfs {

// ---------------------------------------------------------------------------
// Control set

enum class ControlSphere { Full, Upper };

//! Finite sample of the unit sphere for the minimisation over controls.
//! Controls are ordered by zenith then azimuth, so the a3 >= 0 controls form a
//! prefix of length upper_count().
class ControlSet {
 public:
  ControlSet(std::vector<Vec3> controls, std::size_t n_theta, std::size_t n_phi)
      : controls_(std::move(controls)), n_theta_(n_theta), n_phi_(n_phi) {
    upper_count_ = static_cast<std::size_t>(
        std::find_if(controls_.begin(), controls_.end(), [](const Vec3& a) { return a.z < 0.0; }) -
        controls_.begin());
  }

  std::span<const Vec3> controls() const noexcept { return controls_; }
  std::size_t size() const noexcept { return controls_.size(); }
  const Vec3& operator[](std::size_t k) const { return controls_[k]; }
  std::size_t n_theta() const noexcept { return n_theta_; }
  std::size_t n_phi() const noexcept { return n_phi_; }
  std::size_t upper_count() const noexcept { return upper_count_; }

 private:
  std::vector<Vec3> controls_;
  std::size_t n_theta_;
  std::size_t n_phi_;
  std::size_t upper_count_{0};
};

//! Zenith angles theta_k = pi (k + 1/2) / n_theta (Full) or
//! (pi/2) (k + 1/2) / n_theta (Upper), azimuths phi_l = 2 pi l / n_phi. On the
//! full sphere every lower-hemisphere control is the exact mirror (a3 -> -a3)
//! of an upper one.
inline ControlSet build_control_set(std::size_t n_theta, std::size_t n_phi,
                                    ControlSphere sphere = ControlSphere::Full) {
  if (n_theta < 2 || n_phi < 1) throw InvalidArgument("control set needs n_theta >= 2, n_phi >= 1");
  const double pi = std::numbers::pi;
  const double span = sphere == ControlSphere::Full ? pi : 0.5 * pi;
  std::vector<Vec3> controls(n_theta * n_phi);
  for (std::size_t k = 0; k < n_theta; ++k) {
    const std::size_t mirror = n_theta - 1 - k;
    const bool mirrored = sphere == ControlSphere::Full && mirror < k;
    for (std::size_t l = 0; l < n_phi; ++l) {
      Vec3& a = controls[k * n_phi + l];
      if (mirrored) {
        const Vec3& up = controls[mirror * n_phi + l];
        a = {up.x, up.y, -up.z};
        continue;
      }
      const double theta = span * (static_cast<double>(k) + 0.5) / static_cast<double>(n_theta);
      const double phi = 2.0 * pi * static_cast<double>(l) / static_cast<double>(n_phi);
      a = {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    }
  }
  return ControlSet(std::move(controls), n_theta, n_phi);
}

// ---------------------------------------------------------------------------
// Interpolation

namespace detail {

struct Bilinear {
  std::size_t base;  // lower-left node
  double tx;
  double ty;
};

// Foot point in fractional index coordinates, clamped to the grid closure.
inline Bilinear locate(const Grid& g, double fx, double fy) {
  const double max_x = static_cast<double>(g.nx() - 1);
  const double max_y = static_cast<double>(g.ny() - 1);
  fx = std::clamp(fx, 0.0, max_x);
  fy = std::clamp(fy, 0.0, max_y);
  const std::size_t ix = std::min(static_cast<std::size_t>(fx), g.nx() - 2);
  const std::size_t iy = std::min(static_cast<std::size_t>(fy), g.ny() - 2);
  return {g.index(ix, iy), fx - static_cast<double>(ix), fy - static_cast<double>(iy)};
}

// Weighted-sum form keeps the result monotone in every node value, also in
// floating point.
template <typename Read>
inline double blend(const Bilinear& b, std::size_t stride, Read&& read) {
  const double sx = 1.0 - b.tx;
  const double sy = 1.0 - b.ty;
  return sx * sy * read(b.base) + b.tx * sy * read(b.base + 1) + sx * b.ty * read(b.base + stride) +
         b.tx * b.ty * read(b.base + stride + 1);
}

}  // namespace detail

//! Bilinear interpolation of w at a point in domain units. Points off the grid
//! are clamped to its closure; Outside nodes contribute boundary_value(node).
template <typename BoundaryValue>
double interp_bilinear(const ScalarField& w, Vec2 point, const Mask& mask,
                       BoundaryValue&& boundary_value) {
  const Grid& g = w.grid();
  const auto cell = detail::locate(g, (point.x - g.x0()) / g.dx(), (point.y - g.y0()) / g.dy());
  return detail::blend(cell, g.nx(), [&](std::size_t k) {
    return mask[k] == NodeLabel::Outside ? static_cast<double>(boundary_value(k)) : w[k];
  });
}

// ---------------------------------------------------------------------------
// Operator context and node coefficients

//! Everything the node operator reads besides the iterate. Spans are views
//! into fields owned by the caller. An empty lagged gradient means zero.
struct OperatorContext {
  Grid grid;
  ModelSpec model;
  LightSource light;
  Viewer viewer;
  std::span<const double> brightness;
  std::span<const double> lagged_dx;
  std::span<const double> lagged_dy;
  double mu{1.0};
  double h{0.0};
  const ControlSet* controls{nullptr};

  double decay() const { return std::exp(-mu * h); }
  double tau() const { return -std::expm1(-mu * h) / mu; }
};

inline constexpr double kBrightnessFloor = 1e-3;

//! Drift b(x, a) = (c a~ - k w~) / q and cost weight P = c / q.
struct NodeCoefficients {
  double c{0.0};
  double k{0.0};
  double q{1.0};
  double p{0.0};
  Vec2 d_planar{};  // d = (-grad u, 1) / |.|, lagged
  double d_z{1.0};
  bool specular_active{false};

  Vec2 drift(const Vec3& a, const LightSource& light) const {
    const Vec2 w = light.planar();
    return {(c * a.x - k * w.x) / q, (c * a.y - k * w.y) / q};
  }
};

//! Whether the model's coefficients depend on the lagged surface normal.
inline bool needs_lagged_gradient(const ModelSpec& model, const LightSource& light,
                                  const Viewer& viewer) {
  if (std::holds_alternative<Phong>(model)) return std::get<Phong>(model).k_s() > 0.0;
  if (std::holds_alternative<OrenNayar>(model))
    return std::get<OrenNayar>(model).b() > 0.0 && same_direction(light, viewer);
  return false;
}

//! Throws UnsupportedConfiguration when no fixed-point form exists for the
//! model/light/viewer combination.
inline void check_supported(const ModelSpec& model, const LightSource& light,
                            const Viewer& viewer) {
  if (const auto* on = std::get_if<OrenNayar>(&model)) {
    if (on->b() > 0.0 && on_azimuth_factor(light, viewer) > 0.0 && !same_direction(light, viewer))
      throw UnsupportedConfiguration(
          "Oren-Nayar with light and viewer azimuths within 90 degrees (cases 1 and 2) has no "
          "fixed-point form; use the PDE residual for verification");
  }
  if (const auto* ph = std::get_if<Phong>(&model)) {
    if (ph->alpha() != 1.0 && ph->k_s() > 0.0)
      throw UnsupportedConfiguration("the Phong fixed-point form requires alpha = 1");
  }
}

inline NodeCoefficients assemble_coefficients(const OperatorContext& ctx, std::size_t node) {
  NodeCoefficients nc;
  const double intensity = std::clamp(ctx.brightness[node], kBrightnessFloor, 1.0);
  const Vec3& w = ctx.light.direction();

  Vec2 grad{};
  if (!ctx.lagged_dx.empty()) grad = {ctx.lagged_dx[node], ctx.lagged_dy[node]};
  const Vec3 d = graph_normal(grad);
  nc.d_planar = d.xy();
  nc.d_z = d.z;

  if (std::holds_alternative<Lambertian>(ctx.model)) {
    nc.c = intensity;
    nc.k = 1.0;
    nc.q = w.z;
  } else if (const auto* on = std::get_if<OrenNayar>(&ctx.model)) {
    check_supported(ctx.model, ctx.light, ctx.viewer);
    nc.c = intensity;
    if (on->b() > 0.0 && same_direction(ctx.light, ctx.viewer)) {
      const double dw = dot(d, w);
      nc.c = intensity - on->b() + on->b() * dw * dw;
    }
    nc.k = on->a();
    nc.q = on->a() * w.z;
  } else {
    const auto& ph = std::get<Phong>(ctx.model);
    check_supported(ctx.model, ctx.light, ctx.viewer);
    const Vec3& v = ctx.viewer.direction();
    const double dv = dot(d, v);
    const double r_dot_v = 2.0 * dot(d, w) * dv - dot(w, v);
    nc.specular_active = ph.k_s() > 0.0 && r_dot_v >= 0.0;
    if (nc.specular_active) {
      nc.c = intensity + ph.k_s() * dot(w, v);
      nc.k = ph.k_d() + 2.0 * ph.k_s() * dv;
    } else {
      nc.c = intensity;
      nc.k = ph.k_d();
    }
    nc.q = nc.k * w.z;
    if (std::abs(nc.q) < 1e-12) throw DegenerateQ(node, nc.q);
  }
  nc.p = nc.c / nc.q;
  if (nc.p < 0.0) throw NonpositiveP(node, nc.p);
  return nc;
}

// ---------------------------------------------------------------------------
// Node operator

struct NodeUpdate {
  double value;
  std::size_t control;  // index into the control set of the minimiser
};

namespace detail {

// Affine map from a control's planar part to its foot point in index units.
struct FootMap {
  double shift_x;
  double shift_y;
  double scale_x;
  double scale_y;

  Bilinear cell(const Grid& g, const Vec3& a) const {
    return locate(g, shift_x + scale_x * a.x, shift_y + scale_y * a.y);
  }
};

inline FootMap foot_map(const OperatorContext& ctx, const NodeCoefficients& nc, std::size_t node) {
  const Grid& g = ctx.grid;
  const auto [i, j] = g.coords(node);
  const Vec2 wt = ctx.light.planar();
  return {static_cast<double>(i) - ctx.h * nc.k * wt.x / (nc.q * g.dx()),
          static_cast<double>(j) - ctx.h * nc.k * wt.y / (nc.q * g.dy()),
          ctx.h * nc.c / (nc.q * g.dx()), ctx.h * nc.c / (nc.q * g.dy())};
}

template <typename Cell>
NodeUpdate minimise_over_controls(const OperatorContext& ctx, const NodeCoefficients& nc,
                                  std::span<const double> w, std::size_t node, Cell&& cell) {
  const double decay = ctx.decay();
  const double tau = ctx.tau();
  const double cost = tau * nc.p * (1.0 - ctx.mu * w[node]);
  const std::size_t stride = ctx.grid.nx();
  auto read = [w](std::size_t k) { return w[k]; };
  const auto controls = ctx.controls->controls();
  const std::size_t searched = ctx.controls->upper_count();
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t c = 0; c < searched; ++c) {
    const double objective = decay * blend(cell(c), stride, read) - cost * controls[c].z;
    if (objective < best) {
      best = objective;
      best_index = c;
    }
  }
  return {best + tau, best_index};
}

}  // namespace detail

//! min over controls of e^{-mu h} I[W](x_i + h b(x_i, a)) - tau P a3 (1 - mu W_i),
//! plus tau. W must already hold the boundary values on non-Inside nodes.
//! Controls with a3 < 0 are skipped: each is the mirror of an upper control
//! with the same foot point and a cost that is never lower when P >= 0, and
//! the mirror has the lower index, so the result equals the full search.
inline NodeUpdate evaluate_node(const OperatorContext& ctx, const NodeCoefficients& nc,
                                std::span<const double> w, std::size_t node) {
  const detail::FootMap map = detail::foot_map(ctx, nc, node);
  const auto controls = ctx.controls->controls();
  return detail::minimise_over_controls(
      ctx, nc, w, node, [&](std::size_t c) { return map.cell(ctx.grid, controls[c]); });
}

//! Foot-point cells of the searched controls for one node, valid while its
//! coefficients are unchanged.
inline void locate_feet(const OperatorContext& ctx, const NodeCoefficients& nc, std::size_t node,
                        std::span<detail::Bilinear> out) {
  const detail::FootMap map = detail::foot_map(ctx, nc, node);
  const auto controls = ctx.controls->controls();
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = map.cell(ctx.grid, controls[c]);
}

//! Same result as evaluate_node, reading foot cells from locate_feet.
inline NodeUpdate evaluate_node_cached(const OperatorContext& ctx, const NodeCoefficients& nc,
                                       std::span<const detail::Bilinear> feet,
                                       std::span<const double> w, std::size_t node) {
  return detail::minimise_over_controls(ctx, nc, w, node,
                                        [&](std::size_t c) -> const detail::Bilinear& { return feet[c]; });
}

inline NodeUpdate sl_operator_node(const OperatorContext& ctx, const ScalarField& w,
                                   std::size_t node) {
  return evaluate_node(ctx, assemble_coefficients(ctx, node), w.values(), node);
}

}  // namespace sfs
