#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "sfs/errors.hpp"
#include "sfs/grid.hpp"
#include "sfs/vec.hpp"

namespace sfs {

namespace detail {

inline constexpr double kUnitTolerance = 1e-12;

inline Vec3 checked_unit(Vec3 v, const char* what) {
  if (std::abs(norm(v) - 1.0) > kUnitTolerance)
    throw InvalidArgument(std::string(what) + " direction is not a unit vector");
  if (!(v.z > 0.0)) throw InvalidArgument(std::string(what) + " direction needs a positive z");
  return v;
}

}  // namespace detail

//! Direction pointing from the surface towards a light source at infinity.
class LightSource {
 public:
  explicit LightSource(Vec3 unit_direction)
      : dir_(detail::checked_unit(unit_direction, "light")) {}
  static LightSource normalized(Vec3 v) {
    if (!(norm(v) > 0.0)) throw InvalidArgument("light direction is zero");
    return LightSource(sfs::normalized(v));
  }
  static LightSource vertical() { return LightSource({0.0, 0.0, 1.0}); }

  const Vec3& direction() const noexcept { return dir_; }
  Vec2 planar() const noexcept { return dir_.xy(); }
  bool is_vertical() const noexcept { return dir_.x == 0.0 && dir_.y == 0.0; }

 private:
  Vec3 dir_;
};

//! Direction pointing from the surface towards an observer at infinity.
class Viewer {
 public:
  explicit Viewer(Vec3 unit_direction) : dir_(detail::checked_unit(unit_direction, "viewer")) {}
  static Viewer normalized(Vec3 v) {
    if (!(norm(v) > 0.0)) throw InvalidArgument("viewer direction is zero");
    return Viewer(sfs::normalized(v));
  }
  static Viewer vertical() { return Viewer({0.0, 0.0, 1.0}); }

  const Vec3& direction() const noexcept { return dir_; }
  Vec2 planar() const noexcept { return dir_.xy(); }
  bool is_vertical() const noexcept { return dir_.x == 0.0 && dir_.y == 0.0; }

 private:
  Vec3 dir_;
};

struct Lambertian {};

//! Oren-Nayar qualitative model (interreflections ignored).
class OrenNayar {
 public:
  explicit OrenNayar(double sigma) : sigma_(sigma) {
    if (!(sigma >= 0.0) || !(sigma < 0.5 * std::numbers::pi))
      throw InvalidArgument("Oren-Nayar roughness must lie in [0, pi/2)");
    const double s2 = sigma * sigma;
    a_ = 1.0 - 0.5 * s2 / (s2 + 0.33);
    b_ = 0.45 * s2 / (s2 + 0.09);
  }

  double sigma() const noexcept { return sigma_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

 private:
  double sigma_;
  double a_;
  double b_;
};

//! Phong model with the ambient term dropped, so k_d + k_s = 1.
class Phong {
 public:
  Phong(double k_d, double k_s, double alpha = 1.0) : k_d_(k_d), k_s_(k_s), alpha_(alpha) {
    if (!(k_d >= 0.0 && k_d <= 1.0) || !(k_s >= 0.0 && k_s <= 1.0))
      throw InvalidArgument("Phong weights must lie in [0, 1]");
    if (std::abs(k_d + k_s - 1.0) > 1e-12) throw InvalidArgument("Phong weights must sum to 1");
    if (!(alpha >= 1.0 && alpha <= 10.0))
      throw InvalidArgument("Phong exponent must lie in [1, 10]");
  }
  static Phong with_specular(double k_s, double alpha = 1.0) { return {1.0 - k_s, k_s, alpha}; }

  double k_d() const noexcept { return k_d_; }
  double k_s() const noexcept { return k_s_; }
  double alpha() const noexcept { return alpha_; }

 private:
  double k_d_;
  double k_s_;
  double alpha_;
};

using ModelSpec = std::variant<Lambertian, OrenNayar, Phong>;

inline std::string model_name(const ModelSpec& model) {
  struct Namer {
    std::string operator()(const Lambertian&) const { return "lambertian"; }
    std::string operator()(const OrenNayar&) const { return "oren_nayar"; }
    std::string operator()(const Phong&) const { return "phong"; }
  };
  return std::visit(Namer{}, model);
}

//! Largest brightness the model can produce (flat surface under vertical light).
inline double max_brightness(const ModelSpec& model) {
  if (const auto* on = std::get_if<OrenNayar>(&model)) return on->a();
  return 1.0;
}

// ---------------------------------------------------------------------------
// Oren-Nayar case analysis

enum class OnCase { Case1, Case2, Case3, Case4 };

inline constexpr double kSameDirectionTolerance = 1e-9;

//! Light and viewer coincide away from the vertical axis.
inline bool same_direction(const LightSource& light, const Viewer& viewer) {
  if (light.is_vertical()) return false;
  return norm(light.direction() - viewer.direction()) <= kSameDirectionTolerance;
}

//! phi_r - phi_i in [0, 2*pi). A vertical light or viewer has no azimuth; the
//! difference is then reported as pi/2 so the azimuthal factor vanishes.
inline double azimuth_difference(const LightSource& light, const Viewer& viewer) {
  const Vec2 w = light.planar();
  const Vec2 v = viewer.planar();
  if (norm(w) < 1e-12 || norm(v) < 1e-12) return 0.5 * std::numbers::pi;
  double d = std::atan2(v.y, v.x) - std::atan2(w.y, w.x);
  const double two_pi = 2.0 * std::numbers::pi;
  d = std::fmod(d, two_pi);
  if (d < 0.0) d += two_pi;
  return d;
}

inline OnCase classify_on_case(double theta_i, double theta_r, double delta_phi,
                               bool same_dir) {
  if (same_dir) return OnCase::Case4;
  const double pi = std::numbers::pi;
  if (delta_phi >= 0.5 * pi && delta_phi <= 1.5 * pi) return OnCase::Case3;
  return theta_i >= theta_r ? OnCase::Case1 : OnCase::Case2;
}

//! Azimuthal factor max{0, cos(phi_r - phi_i)} as used by the brightness
//! equation: 1 when light and viewer coincide, otherwise the dot product of
//! the planar projections.
inline double on_azimuth_factor(const LightSource& light, const Viewer& viewer) {
  if (same_direction(light, viewer)) return 1.0;
  return std::max(0.0, dot(light.planar(), viewer.planar()));
}

// ---------------------------------------------------------------------------
// Brightness models

inline double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

inline double lambert_brightness(Vec2 grad_u, const LightSource& light) {
  const Vec3& w = light.direction();
  const double s = std::sqrt(1.0 + dot(grad_u, grad_u));
  const double n_dot_w = -dot(light.planar(), grad_u) + w.z;
  return clamp_unit(n_dot_w / s);
}

inline double oren_nayar_brightness(Vec2 grad_u, const LightSource& light, const Viewer& viewer,
                                    const OrenNayar& spec) {
  const double s2 = 1.0 + dot(grad_u, grad_u);
  const double s = std::sqrt(s2);
  const double ni = -dot(light.planar(), grad_u) + light.direction().z;
  const double nr = -dot(viewer.planar(), grad_u) + viewer.direction().z;
  if (ni <= 0.0) return 0.0;
  const double cos_i = ni / s;
  const double m = on_azimuth_factor(light, viewer);
  if (m == 0.0 || spec.b() == 0.0) return clamp_unit(spec.a() * cos_i);

  const double cos_r = nr / s;
  const double sin_i = std::sqrt(std::max(0.0, s2 - ni * ni)) / s;
  const double sin_r = std::sqrt(std::max(0.0, s2 - nr * nr)) / s;
  double sin_alpha_tan_beta = 0.0;
  if (cos_i <= cos_r) {
    // theta_i >= theta_r: alpha = theta_i, beta = theta_r.
    if (cos_r <= 1e-9) throw DegenerateView("cos(theta_r) vanished in Oren-Nayar case 1");
    sin_alpha_tan_beta = sin_i * sin_r / cos_r;
  } else {
    sin_alpha_tan_beta = sin_r * sin_i / cos_i;
  }
  return clamp_unit(cos_i * (spec.a() + spec.b() * sin_alpha_tan_beta * m));
}

inline double phong_brightness(Vec2 grad_u, const LightSource& light, const Viewer& viewer,
                               const Phong& spec) {
  const double s = std::sqrt(1.0 + dot(grad_u, grad_u));
  const double n_dot_w = (-dot(light.planar(), grad_u) + light.direction().z) / s;
  if (n_dot_w <= 0.0) return 0.0;
  const Vec3 n = graph_normal(grad_u);
  const Vec3 r = n * (2.0 * n_dot_w) - light.direction();
  const double r_dot_v = dot(r, viewer.direction());
  const double specular = r_dot_v > 0.0 ? std::pow(r_dot_v, spec.alpha()) : 0.0;
  return clamp_unit(spec.k_d() * n_dot_w + spec.k_s() * specular);
}

inline double brightness(const ModelSpec& model, Vec2 grad_u, const LightSource& light,
                         const Viewer& viewer) {
  struct Eval {
    Vec2 g;
    const LightSource& l;
    const Viewer& v;
    double operator()(const Lambertian&) const { return lambert_brightness(g, l); }
    double operator()(const OrenNayar& s) const { return oren_nayar_brightness(g, l, v, s); }
    double operator()(const Phong& s) const { return phong_brightness(g, l, v, s); }
  };
  return std::visit(Eval{grad_u, light, viewer}, model);
}

// ---------------------------------------------------------------------------
// Eikonal right-hand sides for vertical light (and vertical viewer for Phong)

//! |grad u| implied by brightness I under vertical illumination. For Phong the
//! specular lobe is cut off once R.V < 0, which happens exactly when
//! I <= k_d / sqrt(2); below that the inverse is the Lambertian one scaled by k_d.
inline double eikonal_rhs(const ModelSpec& model, double intensity) {
  const double i_max = max_brightness(model);
  if (!(intensity > 0.0)) throw BrightnessOutOfRange("eikonal right-hand side needs I > 0");
  if (intensity > i_max + 1e-9)
    throw BrightnessOutOfRange("brightness " + std::to_string(intensity) +
                               " exceeds model maximum " + std::to_string(i_max));
  const double in = std::min(intensity, i_max);
  if (in == i_max) return 0.0;

  auto scaled_lambert = [in](double scale) {
    const double r = scale / in;
    return std::sqrt(std::max(0.0, (r - 1.0) * (r + 1.0)));
  };

  if (std::holds_alternative<Lambertian>(model)) return scaled_lambert(1.0);
  if (const auto* on = std::get_if<OrenNayar>(&model)) return scaled_lambert(on->a());

  const auto& ph = std::get<Phong>(model);
  const double kd = ph.k_d();
  const double ks = ph.k_s();
  if (in <= kd / std::numbers::sqrt2) return scaled_lambert(kd);
  const double i_plus = in + ks;
  const double i_minus = in - ks;
  const double q = kd * kd + 8.0 * ks * ks + 8.0 * in * ks;
  const double num = kd * kd - 2.0 * i_plus * i_minus + kd * std::sqrt(q);
  return std::sqrt(std::max(0.0, num / (2.0 * i_plus * i_plus)));
}

// ---------------------------------------------------------------------------
// PDE residuals (verification functionals; zero on consistent data)

inline double oren_nayar_pde_residual(OnCase c, Vec2 grad_u, double intensity,
                                      const LightSource& light, const Viewer& viewer,
                                      const OrenNayar& spec) {
  const double s2 = 1.0 + dot(grad_u, grad_u);
  const double s = std::sqrt(s2);
  const Vec2 wt = light.planar();
  const Vec2 vt = viewer.planar();
  const double ni = -dot(wt, grad_u) + light.direction().z;
  const double nr = -dot(vt, grad_u) + viewer.direction().z;
  const double g_w = std::sqrt(std::max(0.0, s2 - ni * ni));
  const double g_v = std::sqrt(std::max(0.0, s2 - nr * nr));
  const double a = spec.a();
  const double b = spec.b();
  const double wv = dot(wt, vt);
  switch (c) {
    case OnCase::Case1:
      return intensity * s - a * ni - b * wv * g_w * g_v * ni / (s * nr);
    case OnCase::Case2:
      return intensity * s2 - a * ni * s - b * wv * g_w * g_v;
    case OnCase::Case3:
      return intensity * s - a * ni;
    case OnCase::Case4:
      return (intensity - b) * s - a * ni + b * ni * ni / s;
  }
  return 0.0;
}

//! Residual of the Phong equation with alpha = 1 and no specular cut-off.
inline double phong_pde_residual(Vec2 grad_u, double intensity, const LightSource& light,
                                 const Viewer& viewer, const Phong& spec) {
  const double s2 = 1.0 + dot(grad_u, grad_u);
  const double ni = -dot(light.planar(), grad_u) + light.direction().z;
  const double nr = -dot(viewer.planar(), grad_u) + viewer.direction().z;
  return intensity * s2 - spec.k_d() * ni * std::sqrt(s2) - 2.0 * spec.k_s() * ni * nr +
         spec.k_s() * dot(light.direction(), viewer.direction()) * s2;
}

// ---------------------------------------------------------------------------
// Rendering

inline double quantize_8bit(double v) { return std::round(clamp_unit(v) * 255.0) / 255.0; }

//! Renders a height field. Nodes Outside the mask show the flat background.
inline ScalarField render_image(const ScalarField& height, const Mask& mask,
                                const ModelSpec& model, const LightSource& light,
                                const Viewer& viewer, bool quantize) {
  const Gradient grad = gradient_central(height, mask);
  const double background = brightness(model, Vec2{}, light, viewer);
  ScalarField image(height.grid(), background);
  for (std::size_t k = 0; k < image.size(); ++k) {
    if (mask[k] != NodeLabel::Outside)
      image[k] = brightness(model, {grad.dx[k], grad.dy[k]}, light, viewer);
    if (quantize) image[k] = quantize_8bit(image[k]);
  }
  return image;
}

}  // namespace sfs
