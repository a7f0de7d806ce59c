#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "sfs/reflectance.hpp"
#include "sfs/scenes.hpp"

using namespace sfs;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

Vec3 random_direction(std::mt19937& rng, double min_z = 0.05) {
  std::normal_distribution<double> n(0.0, 1.0);
  while (true) {
    Vec3 v{n(rng), n(rng), std::abs(n(rng))};
    const double len = norm(v);
    if (len < 1e-6) continue;
    v = v * (1.0 / len);
    if (v.z >= min_z) return v;
  }
}

Vec2 random_gradient(std::mt19937& rng, double max_norm) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi), mag(0.0, max_norm);
  const double a = ang(rng), m = mag(rng);
  return {m * std::cos(a), m * std::sin(a)};
}

}  // namespace

TEST(Directions, RejectNonUnitOrDownward) {
  EXPECT_THROW(LightSource({0.0, 0.0, 2.0}), InvalidArgument);
  EXPECT_THROW(LightSource({1.0, 0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(Viewer({0.0, 0.6, -0.8}), InvalidArgument);
  const LightSource l = LightSource::normalized({1.0, 0.0, 1.0});
  EXPECT_NEAR(l.direction().x, kInvSqrt2, 1e-15);
  EXPECT_FALSE(l.is_vertical());
  EXPECT_TRUE(LightSource::vertical().is_vertical());
}

TEST(Models, OrenNayarCoefficients) {
  const OrenNayar on(0.4);
  EXPECT_NEAR(on.a(), 1.0 - 0.5 * 0.16 / 0.49, 1e-15);
  EXPECT_NEAR(on.a(), 0.836734693877551, 1e-12);
  EXPECT_NEAR(on.b(), 0.288, 1e-15);
  const OrenNayar smooth(0.0);
  EXPECT_EQ(smooth.a(), 1.0);
  EXPECT_EQ(smooth.b(), 0.0);
  EXPECT_THROW(OrenNayar(-0.1), InvalidArgument);
  EXPECT_THROW(OrenNayar(std::numbers::pi / 2), InvalidArgument);
}

TEST(Models, PhongWeightsMustSumToOne) {
  EXPECT_THROW(Phong(0.5, 0.4), InvalidArgument);
  EXPECT_THROW(Phong(0.6, 0.4, 0.5), InvalidArgument);
  EXPECT_THROW(Phong(0.6, 0.4, 11.0), InvalidArgument);
  const Phong p = Phong::with_specular(0.3);
  EXPECT_DOUBLE_EQ(p.k_d(), 0.7);
}

TEST(Lambert, Examples) {
  const auto up = LightSource::vertical();
  EXPECT_DOUBLE_EQ(lambert_brightness({0, 0}, up), 1.0);
  EXPECT_NEAR(lambert_brightness({1, 0}, up), kInvSqrt2, 1e-15);
  EXPECT_NEAR(lambert_brightness({0, 0}, LightSource::normalized({1, 0, 1})), kInvSqrt2, 1e-15);
}

TEST(Lambert, ClampsSelfShadowToZero) {
  const auto l = LightSource::normalized({1, 0, 1});
  EXPECT_EQ(lambert_brightness({3.0, 0.0}, l), 0.0);
}

TEST(OnCases, Classification) {
  const double pi = std::numbers::pi;
  EXPECT_EQ(classify_on_case(0.3, 0.4, pi, false), OnCase::Case3);
  EXPECT_EQ(classify_on_case(0.3, 0.4, 0.0, true), OnCase::Case4);
  EXPECT_EQ(classify_on_case(0.5, 0.2, 0.0, false), OnCase::Case1);
  EXPECT_EQ(classify_on_case(0.2, 0.5, 0.1, false), OnCase::Case2);
  EXPECT_EQ(classify_on_case(0.2, 0.5, 0.5 * pi, false), OnCase::Case3);
  EXPECT_EQ(classify_on_case(0.2, 0.5, 1.5 * pi, false), OnCase::Case3);
}

TEST(OnCases, ExactlyOneCasePerTriple) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> th(0.0, std::numbers::pi / 2),
      ph(0.0, 2 * std::numbers::pi);
  for (int k = 0; k < 1000; ++k) {
    const double ti = th(rng), tr = th(rng), d = ph(rng);
    const OnCase c = classify_on_case(ti, tr, d, false);
    const bool azimuth_off = d >= std::numbers::pi / 2 && d <= 1.5 * std::numbers::pi;
    if (azimuth_off) EXPECT_EQ(c, OnCase::Case3);
    else EXPECT_EQ(c, ti >= tr ? OnCase::Case1 : OnCase::Case2);
  }
}

TEST(OrenNayar, Examples) {
  const auto up = LightSource::vertical();
  const auto vv = Viewer::vertical();
  const OrenNayar on(0.4);
  EXPECT_NEAR(oren_nayar_brightness({0, 0}, up, vv, on), 0.836734693877551, 1e-12);
  EXPECT_NEAR(oren_nayar_brightness({1, 0}, up, vv, on), on.a() * kInvSqrt2, 1e-12);
  EXPECT_NEAR(oren_nayar_brightness({1, 0}, up, Viewer::normalized({0.3, 0.2, 1.0}), on),
              0.591660, 1e-6);
}

TEST(OrenNayar, SmoothSurfaceEqualsLambert) {
  std::mt19937 rng(5);
  const OrenNayar on(0.0);
  for (int k = 0; k < 2000; ++k) {
    const LightSource l(random_direction(rng));
    const Viewer v(random_direction(rng));
    const Vec2 p = random_gradient(rng, 5.0);
    EXPECT_NEAR(oren_nayar_brightness(p, l, v, on), lambert_brightness(p, l), 1e-15);
  }
}

TEST(OrenNayar, AzimuthOppositeIsScaledLambert) {
  std::mt19937 rng(9);
  const OrenNayar on(0.6);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 w = random_direction(rng);
    const LightSource l(w);
    const Viewer v = Viewer::normalized({-w.x, -w.y, 0.7});
    const Vec2 p = random_gradient(rng, 3.0);
    EXPECT_NEAR(oren_nayar_brightness(p, l, v, on), on.a() * lambert_brightness(p, l), 1e-14);
  }
}

// Direct angle-based evaluation as an independent oracle.
TEST(OrenNayar, MatchesAngleFormulation) {
  std::mt19937 rng(21);
  const OrenNayar on(0.35);
  int checked = 0;
  for (int k = 0; k < 3000; ++k) {
    const LightSource l(random_direction(rng, 0.3));
    const Viewer v(random_direction(rng, 0.3));
    const Vec2 p = random_gradient(rng, 1.5);
    const Vec3 n = graph_normal(p);
    const double ci = dot(n, l.direction()), cr = dot(n, v.direction());
    if (ci <= 0.0 || cr <= 1e-3) continue;
    const double ti = std::acos(std::min(1.0, ci)), tr = std::acos(std::min(1.0, cr));
    const double alpha = std::max(ti, tr), beta = std::min(ti, tr);
    const double m = std::max(0.0, dot(l.planar(), v.planar()));
    const double expected =
        std::clamp(ci * (on.a() + on.b() * std::sin(alpha) * std::tan(beta) * m), 0.0, 1.0);
    EXPECT_NEAR(oren_nayar_brightness(p, l, v, on), expected, 1e-10);
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(Phong, Examples) {
  const auto up = LightSource::vertical();
  const auto vv = Viewer::vertical();
  for (double ks : {0.0, 0.3, 0.8})
    EXPECT_DOUBLE_EQ(phong_brightness({0, 0}, up, vv, Phong::with_specular(ks)), 1.0);
  EXPECT_NEAR(phong_brightness({1, 0}, up, vv, Phong(0.6, 0.4)), 0.6 * kInvSqrt2, 1e-15);
}

TEST(Phong, NoSpecularEqualsLambert) {
  std::mt19937 rng(6);
  const Phong ph(1.0, 0.0);
  for (int k = 0; k < 2000; ++k) {
    const LightSource l(random_direction(rng));
    const Viewer v(random_direction(rng));
    const Vec2 p = random_gradient(rng, 5.0);
    EXPECT_NEAR(phong_brightness(p, l, v, ph), lambert_brightness(p, l), 1e-15);
  }
}

TEST(Brightness, StaysInUnitInterval) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> sig(0.0, 1.5), ks(0.0, 1.0), al(1.0, 10.0);
  for (int k = 0; k < 100000; ++k) {
    const LightSource l(random_direction(rng));
    const Viewer v(random_direction(rng, 0.2));
    const Vec2 p = random_gradient(rng, 10.0);
    const double s = ks(rng);
    const std::array<ModelSpec, 3> models{Lambertian{}, OrenNayar(sig(rng)),
                                          Phong(1.0 - s, s, al(rng))};
    for (const auto& m : models) {
      double b = 0.0;
      try {
        b = brightness(m, p, l, v);
      } catch (const DegenerateView&) {
        continue;
      }
      ASSERT_GE(b, 0.0);
      ASSERT_LE(b, 1.0);
    }
  }
}

TEST(Eikonal, Examples) {
  EXPECT_EQ(eikonal_rhs(Lambertian{}, 1.0), 0.0);
  EXPECT_NEAR(eikonal_rhs(Lambertian{}, 0.5), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(eikonal_rhs(Phong(1.0, 0.0), 0.5), std::sqrt(3.0), 1e-15);
  const OrenNayar on(0.4);
  EXPECT_EQ(eikonal_rhs(on, on.a()), 0.0);
  EXPECT_THROW(eikonal_rhs(on, on.a() + 1e-6), BrightnessOutOfRange);
  EXPECT_NO_THROW(eikonal_rhs(on, on.a() + 1e-10));
  EXPECT_THROW(eikonal_rhs(Lambertian{}, 0.0), BrightnessOutOfRange);
}

TEST(Eikonal, PhongZeroSpecularMatchesLambertAlgebra) {
  for (double i : {0.05, 0.2, 0.5, 0.7, 0.95}) {
    const double by_formula = std::sqrt((2.0 - 2.0 * i * i) / (2.0 * i * i));
    EXPECT_NEAR(eikonal_rhs(Phong(1.0, 0.0), i), by_formula, 1e-12);
  }
}

TEST(Eikonal, DecreasesWithBrightness) {
  const std::array<ModelSpec, 4> models{Lambertian{}, OrenNayar(0.5), Phong(0.6, 0.4),
                                        Phong(0.2, 0.8)};
  for (const auto& m : models) {
    double prev = std::numeric_limits<double>::infinity();
    const double top = max_brightness(m);
    for (int k = 1; k <= 2000; ++k) {
      const double f = eikonal_rhs(m, top * k / 2000.0);
      EXPECT_LE(f, prev);
      prev = f;
    }
    EXPECT_EQ(prev, 0.0);
  }
}

TEST(Eikonal, InvertsBrightnessUnderVerticalLight) {
  std::mt19937 rng(17);
  const auto up = LightSource::vertical();
  const auto vv = Viewer::vertical();
  const std::array<ModelSpec, 6> models{Lambertian{},     OrenNayar(0.3),  OrenNayar(0.9),
                                        Phong(0.6, 0.4), Phong(0.2, 0.8), Phong(0.9, 0.1)};
  for (const auto& m : models)
    for (int k = 0; k < 1000; ++k) {
      const Vec2 p = random_gradient(rng, 4.0);
      const double b = brightness(m, p, up, vv);
      EXPECT_NEAR(eikonal_rhs(m, b), norm(p), 1e-9) << model_name(m);
    }
}

TEST(PdeResidual, VanishesOnRenderedData) {
  std::mt19937 rng(4);
  const OrenNayar on(0.45);
  int seen[4] = {0, 0, 0, 0};
  for (int k = 0; k < 4000; ++k) {
    const LightSource l(random_direction(rng, 0.4));
    const bool coincide = k % 5 == 0;
    const Viewer v = coincide ? Viewer(l.direction()) : Viewer(random_direction(rng, 0.4));
    const Vec2 p = random_gradient(rng, 0.8);
    const Vec3 n = graph_normal(p);
    const double ci = dot(n, l.direction()), cr = dot(n, v.direction());
    if (ci <= 0.05 || cr <= 0.05 || l.is_vertical()) continue;
    const double dphi = azimuth_difference(l, v);
    const OnCase c = classify_on_case(std::acos(ci), std::acos(cr), dphi, same_direction(l, v));
    const double i = oren_nayar_brightness(p, l, v, on);
    if (i >= 1.0) continue;
    EXPECT_NEAR(oren_nayar_pde_residual(c, p, i, l, v, on), 0.0, 1e-10);
    ++seen[static_cast<int>(c)];
  }
  for (int c = 0; c < 4; ++c) EXPECT_GT(seen[c], 20) << "case " << c + 1;

  const Phong ph(0.7, 0.3);
  for (int k = 0; k < 1000; ++k) {
    const LightSource l(random_direction(rng, 0.4));
    const Viewer v(random_direction(rng, 0.4));
    const Vec2 p = random_gradient(rng, 0.3);
    const Vec3 n = graph_normal(p);
    const double rv = 2.0 * dot(n, l.direction()) * dot(n, v.direction()) - dot(l.direction(), v.direction());
    if (rv <= 0.0 || dot(n, l.direction()) <= 0.0) continue;
    const double i = phong_brightness(p, l, v, ph);
    if (i >= 1.0) continue;
    EXPECT_NEAR(phong_pde_residual(p, i, l, v, ph), 0.0, 1e-10);
  }
}

TEST(Render, FlatFieldIsUniformlyBright) {
  const Grid g = Grid::centered(16, 16, 2.0, 2.0);
  const Mask m = build_mask_from_predicate(g, [](Vec2) { return true; });
  const ScalarField img = render_image(ScalarField(g, 0.0), m, Lambertian{}, LightSource::vertical(),
                                       Viewer::vertical(), false);
  for (double v : img) EXPECT_EQ(v, 1.0);
}

TEST(Render, SphereApexIsWhiteAndSmoothOrenNayarMatchesLambert) {
  const Grid g = Grid::centered(257, 257, 2.0, 2.0);
  const Scene s = make_sphere(g);
  const auto up = LightSource::vertical();
  const auto vv = Viewer::vertical();
  const ScalarField lam = render_image(s.height, s.mask, Lambertian{}, up, vv, false);
  const ScalarField on = render_image(s.height, s.mask, OrenNayar(0.0), up, vv, false);
  EXPECT_DOUBLE_EQ(lam(128, 128), 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(lam[k], on[k]);
}

TEST(Render, QuantizationSnapsToByteLevels) {
  EXPECT_DOUBLE_EQ(quantize_8bit(0.5001), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(quantize_8bit(0.5039), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(quantize_8bit(1.2), 1.0);
  EXPECT_DOUBLE_EQ(quantize_8bit(-0.1), 0.0);
}
