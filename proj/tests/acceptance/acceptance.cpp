// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sfs/sfs.hpp"

using namespace sfs;

namespace {

std::map<int, std::string> lines;
int failures = 0;

// Records the verdict; progress goes to stderr, the ordered summary to stdout.
void verdict(int id, const std::string& title, bool ok, const std::string& detail) {
  char head[128];
  std::snprintf(head, sizeof head, "[%s] %2d %s: ", ok ? "PASS" : "FAIL", id, title.c_str());
  lines[id] = head + detail;
  std::fprintf(stderr, "%s\n", lines[id].c_str());
  if (!ok) ++failures;
}

template <class... Args>
std::string fmt(const char* pattern, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

bool within_factor(double value, double target, double factor) {
  return value >= target / factor && value <= target * factor;
}

// Runs `body`; an exception counts as a failure of that criterion.
void guarded(int id, const std::string& title, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    verdict(id, title, false, std::string("threw: ") + e.what());
  }
}

const LightSource kUp = LightSource::vertical();
const Viewer kTop = Viewer::vertical();

// ---------------------------------------------------------------------------
// 1, 2, 8 (sphere), 9

struct SphereRun {
  ScalarField image;
  SolveResult result;
};

SphereRun sphere_run(const Scene& s, const ModelSpec& model, const SolverConfig& sc) {
  ScalarField image = render_image(s.height, s.mask, model, kUp, kTop, true);
  SolveResult r = solve(image, s.mask, model, kUp, kTop, sc);
  return {std::move(image), std::move(r)};
}

void sphere_criteria() {
  const Grid g = Grid::centered(256, 256, 2.0, 2.0);
  const Scene s = make_sphere(g);
  SolverConfig sc;
  sc.h = g.dx() / 3.0;

  std::optional<SphereRun> lam;
  guarded(1, "sphere benchmark", [&] {
    lam = sphere_run(s, Lambertian{}, sc);
    const SolveReport& rep = lam->result.report;
    const ErrorReport se = surface_errors(s.height, lam->result.height, s.mask);
    const ScalarField again = render_image(lam->result.height, s.mask, Lambertian{}, kUp, kTop, true);
    const ErrorReport ie = image_errors(lam->image, again, s.mask, true);
    const bool ok = se.l2 >= 0.026 && se.l2 <= 0.106 && within_factor(se.linf, 0.0910, 2.0) &&
                    within_factor(ie.l2, 0.0046, 3.0) && rep.iterations >= 1000 &&
                    rep.iterations <= 4000 && rep.wall_time < 60.0;
    verdict(1, "sphere benchmark", ok,
            fmt("surface l2 %.4f linf %.4f, image l2 %.4f, %zu iterations, %.1f s", se.l2, se.linf,
                ie.l2, rep.iterations, rep.wall_time));
  });

  guarded(2, "model reductions", [&] {
    if (!lam) throw Error("no Lambertian reference run");
    double worst = 0.0;
    for (const ModelSpec& m : {ModelSpec{OrenNayar(0.0)}, ModelSpec{Phong::with_specular(0.0)}}) {
      const SphereRun r = sphere_run(s, m, sc);
      for (std::size_t k = 0; k < g.size(); ++k)
        worst = std::max(worst, std::abs(r.result.height[k] - lam->result.height[k]));
    }
    verdict(2, "model reductions", worst <= 1e-12,
            fmt("max node difference to Lambertian %.3g", worst));
  });

  guarded(8, "a-posteriori closure", [&] {
    if (!lam) throw Error("no Lambertian reference run");
    const ScalarField again = render_image(lam->result.height, s.mask, Lambertian{}, kUp, kTop, true);
    const double sphere_l2 = image_errors(lam->image, again, s.mask, true).l2;

    const Scene vase = make_vase(g);
    SolverConfig vc;
    const ScalarField image = render_image(vase.height, vase.mask, Lambertian{}, kUp, kTop, true);
    const SolveResult r = solve(image, vase.mask, Lambertian{}, kUp, kTop, vc);
    const ScalarField vase_again = render_image(r.height, vase.mask, Lambertian{}, kUp, kTop, true);
    const double vase_l2 = image_errors(image, vase_again, vase.mask, true).l2;
    verdict(8, "a-posteriori closure", sphere_l2 <= 0.05 && vase_l2 <= 0.05,
            fmt("image l2 sphere %.4f, vase %.4f", sphere_l2, vase_l2));
  });

  guarded(9, "supersolution monotonicity", [&] {
    if (!lam) throw Error("no Lambertian reference run");
    const SolveReport& rep = lam->result.report;
    verdict(9, "supersolution monotonicity", rep.monotone_decrease && rep.monotone_violations == 0,
            fmt("%zu increases over %zu sweeps", rep.monotone_violations, rep.iterations));
  });
}

// ---------------------------------------------------------------------------
// 3

bool diagonal_minima(const CrossMatrix& m, double ErrorReport::*norm) {
  for (std::size_t r = 0; r < m.errors.size(); ++r)
    for (std::size_t c = 0; c < m.errors[r].size(); ++c)
      if (c != r && !(m.errors[r][r].*norm < m.errors[r][c].*norm)) return false;
  return true;
}

void tent_criterion() {
  guarded(3, "parameter ordering", [] {
    const Grid g = Grid::centered(96, 96, 2.0, 2.0);
    SolverConfig sc;
    sc.n_theta = 48;
    sc.n_phi = 32;
    std::string detail;
    bool ok = true;
    for (bool phong : {false, true}) {
      const CrossMatrix m = tent_cross_matrix(g, phong, sc);
      const bool l2 = diagonal_minima(m, &ErrorReport::l2);
      const bool linf = diagonal_minima(m, &ErrorReport::linf);
      ok = ok && l2 && linf;
      detail += fmt("%s l2 %s linf %s; ", phong ? "PH" : "ON", l2 ? "diagonal" : "off-diagonal",
                    linf ? "diagonal" : "off-diagonal");
    }
    verdict(3, "parameter ordering", ok, detail + "96x96, 48x32 controls");
  });
}

// ---------------------------------------------------------------------------
// 4

void vase_bc_criterion() {
  guarded(4, "boundary-condition study", [] {
    const Grid g = Grid::centered(256, 256, 2.0, 2.0);
    const Scene s = make_vase(g);
    const ScalarField image = render_image(s.height, s.mask, Lambertian{}, kUp, kTop, true);
    SolverConfig zero, rim;
    rim.bc = DirichletField{*s.boundary};
    auto error = [&](const SolverConfig& sc) {
      return surface_errors(s.height, solve(image, s.mask, Lambertian{}, kUp, kTop, sc).height, s.mask).l2;
    };
    const double e_zero = error(zero), e_rim = error(rim);
    verdict(4, "boundary-condition study", e_zero >= 3.0 * e_rim,
            fmt("surface l2 zero %.4f, rim %.4f, ratio %.2f", e_zero, e_rim, e_zero / e_rim));
  });
}

// ---------------------------------------------------------------------------
// 5

void basin_criterion() {
  guarded(5, "maximal solution", [] {
    const Grid g = basin_grid();
    const Scene s = make_basin(g, BasinForm::Radial);
    const ScalarField image = render_image(s.height, s.mask, Lambertian{}, kUp, kTop, true);
    SolverConfig unpinned, pinned;
    unpinned.eta = pinned.eta = 1e-4;
    pinned.pinned = {{75, 75, 0.0}};
    const SolveResult a = solve(image, s.mask, Lambertian{}, kUp, kTop, unpinned);
    const SolveResult b = solve(image, s.mask, Lambertian{}, kUp, kTop, pinned);
    double above = -1.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (s.mask[k] == NodeLabel::Inside) above = std::max(above, a.height[k] - s.height[k]);
    const double da = surface_errors(s.height, a.height, s.mask).linf;
    const double db = surface_errors(s.height, b.height, s.mask).linf;
    const bool ok = above > 0.0 && db <= 0.7 * da && b.report.iterations < a.report.iterations;
    verdict(5, "maximal solution", ok,
            fmt("unpinned %zu iterations linf %.4f (max above %.4f), pinned %zu iterations linf %.4f",
                a.report.iterations, da, above, b.report.iterations, db));
  });
}

// ---------------------------------------------------------------------------
// 6

ScalarField random_field(const Grid& g, std::mt19937& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  ScalarField f(g);
  for (auto& v : f) v = u(rng);
  return f;
}

// A 9x9 problem with frozen coefficients: image, lagged gradient, light and viewer.
struct FrozenCase {
  Grid grid{Grid::centered(9, 9, 2.0, 2.0)};
  ScalarField image{grid};
  ScalarField lag_dx{grid};
  ScalarField lag_dy{grid};
  ModelSpec model{Lambertian{}};
  LightSource light{LightSource::vertical()};
  Viewer viewer{Viewer::vertical()};
  double mu{1.0};
  double p_max{0.0};

  OperatorContext context(const ControlSet& controls) const {
    const double h = grid.dx();
    return {grid, model, light, viewer, image.values(), lag_dx.values(), lag_dy.values(), mu, h,
            &controls};
  }
};

// Draws cases until every node has 0 <= P and P * a3_max <= cap.
FrozenCase frozen_case(std::mt19937& rng, const ControlSet& controls, double cap, int kind) {
  std::uniform_real_distribution<double> tilt(-0.4, 0.4), mu(0.5, 1.0), rough(0.05, 0.9),
      spec(0.05, 0.6), scale(0.05, 1.0);
  const double a3_max = controls[0].z;
  for (;;) {
    FrozenCase fc;
    fc.mu = mu(rng);
    const Vec3 dir = normalized(Vec3{tilt(rng), tilt(rng), 1.0});
    fc.light = LightSource(dir);
    if (kind == 0) {
      fc.model = Lambertian{};
    } else if (kind == 1) {
      fc.model = OrenNayar(rough(rng));
      fc.viewer = Viewer(dir);
    } else {
      fc.model = Phong::with_specular(spec(rng));
    }
    fc.image = random_field(fc.grid, rng, 0.02, scale(rng));
    fc.lag_dx = random_field(fc.grid, rng, -0.6, 0.6);
    fc.lag_dy = random_field(fc.grid, rng, -0.6, 0.6);
    const ControlSet& cs = controls;
    const OperatorContext ctx = fc.context(cs);
    bool valid = true;
    for (std::size_t k = 0; k < fc.grid.size() && valid; ++k) {
      try {
        const double p = assemble_coefficients(ctx, k).p;
        fc.p_max = std::max(fc.p_max, p);
        valid = p * a3_max <= cap;
      } catch (const Error&) {
        valid = false;
      }
    }
    if (valid) return fc;
  }
}

std::vector<double> apply_all(const OperatorContext& ctx, const ScalarField& w) {
  std::vector<double> out(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) out[k] = sl_operator_node(ctx, w, k).value;
  return out;
}

void property_criterion() {
  guarded(6, "operator properties", [] {
    const ControlSet controls = build_control_set(12, 8);
    const double a3_max = controls[0].z;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> bump(0.0, 0.2);
    const int trials = 1000;
    std::size_t bounded = 0, monotone = 0, contraction = 0;

    for (int t = 0; t < trials; ++t) {
      const FrozenCase fc = frozen_case(rng, controls, 1.0, t % 3);
      const OperatorContext ctx = fc.context(controls);
      const double top = 1.0 / fc.mu;
      for (double v : apply_all(ctx, random_field(fc.grid, rng, 0.0, top)))
        if (!(v >= 0.0 && v <= top + 1e-15)) ++bounded;
    }
    for (int t = 0; t < trials; ++t) {
      const FrozenCase fc = frozen_case(rng, controls, 1.0, t % 3);
      const OperatorContext ctx = fc.context(controls);
      const double top = 1.0 / fc.mu;
      const ScalarField lo = random_field(fc.grid, rng, 0.0, 0.8 * top);
      ScalarField hi = lo;
      for (auto& v : hi) v = std::min(top, v + bump(rng));
      const auto a = apply_all(ctx, lo), b = apply_all(ctx, hi);
      for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k] > b[k]) ++monotone;
    }
    for (int t = 0; t < trials; ++t) {
      const FrozenCase fc = frozen_case(rng, controls, 0.45, t % 3);
      const OperatorContext ctx = fc.context(controls);
      const double top = 1.0 / fc.mu;
      const ScalarField w1 = random_field(fc.grid, rng, 0.0, top);
      const ScalarField w2 = random_field(fc.grid, rng, 0.0, top);
      const auto a = apply_all(ctx, w1), b = apply_all(ctx, w2);
      double in_gap = 0.0, out_gap = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        in_gap = std::max(in_gap, std::abs(w1[k] - w2[k]));
        out_gap = std::max(out_gap, std::abs(a[k] - b[k]));
      }
      const double factor = ctx.decay() + ctx.tau() * fc.p_max * a3_max;
      if (!(fc.p_max * a3_max < fc.mu && factor < 1.0 && out_gap <= factor * in_gap + 1e-15))
        ++contraction;
    }
    verdict(6, "operator properties", bounded + monotone + contraction == 0,
            fmt("%d trials each over Lambertian, Oren-Nayar and Phong; violations: bounds %zu, "
                "monotonicity %zu, contraction %zu",
                trials, bounded, monotone, contraction));
  });
}

// ---------------------------------------------------------------------------
// 7

void eikonal_criterion() {
  guarded(7, "eikonal identity", [] {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi), length(0.0, 4.0);
    const std::vector<ModelSpec> models{Lambertian{},     OrenNayar(0.3),   OrenNayar(0.9),
                                        Phong(0.6, 0.4), Phong(0.2, 0.8), Phong(0.9, 0.1)};
    double worst = 0.0;
    for (const auto& m : models)
      for (int k = 0; k < 1000; ++k) {
        const double a = angle(rng), r = length(rng);
        const Vec2 p{r * std::cos(a), r * std::sin(a)};
        worst = std::max(worst, std::abs(eikonal_rhs(m, brightness(m, p, kUp, kTop)) - r));
      }
    verdict(7, "eikonal identity", worst <= 1e-9,
            fmt("%zu models x 1000 gradients, max error %.3g", models.size(), worst));
  });
}

// ---------------------------------------------------------------------------
// 10

void scaling_criterion() {
  guarded(10, "iteration scaling", [] {
    const LightSource light = LightSource::normalized({1.0, 0.0, 1.0});
    std::size_t iters[2];
    const std::size_t sizes[2] = {128, 256};
    for (int k = 0; k < 2; ++k) {
      const Grid g = Grid::centered(sizes[k], sizes[k], 2.0, 2.0);
      const Scene s = make_vase(g);
      const ScalarField image = render_image(s.height, s.mask, Lambertian{}, light, kTop, true);
      SolverConfig sc;
      sc.bc = DirichletField{*s.boundary};
      iters[k] = solve(image, s.mask, Lambertian{}, light, kTop, sc).report.iterations;
    }
    const double ratio = static_cast<double>(iters[1]) / static_cast<double>(iters[0]);
    verdict(10, "iteration scaling", ratio >= 1.5 && ratio <= 4.0,
            fmt("vase 128 -> 256: %zu -> %zu iterations, ratio %.2f", iters[0], iters[1], ratio));
  });
}

}  // namespace

int main() {
  sphere_criteria();
  tent_criterion();
  vase_bc_criterion();
  basin_criterion();
  property_criterion();
  eikonal_criterion();
  scaling_criterion();
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria failed\n", failures, lines.size());
  return failures == 0 ? 0 : 1;
}
