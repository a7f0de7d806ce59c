#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sfs/errors.hpp"
#include "sfs/grid.hpp"
#include "sfs/hj_core.hpp"
#include "sfs/parallel.hpp"
#include "sfs/reflectance.hpp"

namespace sfs {

// ---------------------------------------------------------------------------
// Kruzkov change of variable: mu v = 1 - exp(-mu u)

inline double kruzkov_forward(double u, double mu) { return -std::expm1(-mu * u) / mu; }

inline double kruzkov_inverse(double v, double mu) {
  if (!(v < 1.0 / mu)) throw DomainError("Kruzkov value must be below 1/mu");
  return -std::log1p(-mu * v) / mu;
}

// ---------------------------------------------------------------------------
// Configuration

struct DirichletZero {};
//! Prescribed heights, read on Boundary (and Outside) nodes.
struct DirichletField {
  ScalarField height;
};
//! v = 1/mu on the boundary.
struct StateConstraint {};

using BoundaryCondition = std::variant<DirichletZero, DirichletField, StateConstraint>;

struct PinnedNode {
  std::size_t i;
  std::size_t j;
  double height;
};

struct SolverConfig {
  double mu{1.0};
  std::optional<double> h;  // defaults to min(dx, dy)
  double eta{1e-8};
  std::size_t max_iter{100000};
  BoundaryCondition bc{DirichletZero{}};
  std::vector<PinnedNode> pinned;
  std::size_t n_theta{12};
  std::size_t n_phi{8};
  ControlSphere sphere{ControlSphere::Full};
  //! Solve Phong with vertical light and viewer as the equivalent eikonal
  //! problem, which has no lagged coefficients.
  bool eikonal_fast_path{true};
  std::size_t threads{default_thread_count()};
};

enum class Termination { Converged, MaxIterations };

inline std::string to_string(Termination t) {
  return t == Termination::Converged ? "converged" : "max_iterations";
}

struct SolveReport {
  std::size_t iterations{0};
  std::vector<double> residual_history;  // sup-norm of W^{n+1} - W^n per sweep
  double wall_time{0.0};                 // seconds
  std::vector<double> max_p_a3;          // per sweep, over Inside nodes at the minimiser
  bool monotone_decrease{true};          // no node increased on any sweep
  std::size_t monotone_violations{0};
  Termination termination{Termination::MaxIterations};
  std::string formulation;  // "fixed_point" or "eikonal"
  bool lagged_coefficients{false};
};

struct SolveResult {
  ScalarField height;
  ScalarField kruzkov;
  SolveReport report;
};

//! Thrown when max_iter sweeps did not reach the tolerance; carries the last iterate.
class NoConvergence : public Error {
 public:
  explicit NoConvergence(SolveResult partial)
      : Error("fixed-point iteration stopped after " +
              std::to_string(partial.report.iterations) + " sweeps without converging"),
        partial_(std::move(partial)) {}

  const SolveResult& partial() const noexcept { return partial_; }

 private:
  SolveResult partial_;
};

// ---------------------------------------------------------------------------
// Driver

namespace detail {

inline constexpr double kSaturation = 1.0 - 1e-15;

inline double height_from_kruzkov(double v, double mu) {
  return kruzkov_inverse(std::min(v, kSaturation / mu), mu);
}

inline double boundary_kruzkov(const BoundaryCondition& bc, std::size_t node, double mu) {
  if (std::holds_alternative<DirichletZero>(bc)) return 0.0;
  if (std::holds_alternative<StateConstraint>(bc)) return 1.0 / mu;
  const double g = std::get<DirichletField>(bc).height[node];
  return std::isfinite(g) ? kruzkov_forward(std::max(g, 0.0), mu) : 0.0;
}

}  // namespace detail

//! Kruzkov iterate with boundary values on non-Inside nodes and 1/mu inside.
inline ScalarField initial_iterate(const Mask& mask, const BoundaryCondition& bc, double mu) {
  if (const auto* f = std::get_if<DirichletField>(&bc))
    if (!(f->height.grid() == mask.grid()))
      throw InvalidArgument("boundary field grid does not match the mask");
  ScalarField w(mask.grid(), 1.0 / mu);
  for (std::size_t k = 0; k < w.size(); ++k)
    if (mask[k] != NodeLabel::Inside) w[k] = detail::boundary_kruzkov(bc, k, mu);
  return w;
}

//! Prepares the problem actually iterated: Phong under vertical light and
//! viewer becomes a Lambertian problem with brightness 1/sqrt(1 + f^2), f the
//! eikonal right-hand side. Under vertical light and viewer, brightness is
//! capped at the model maximum.
struct PreparedProblem {
  ModelSpec model;
  ScalarField brightness;
  std::string formulation;
};

inline PreparedProblem prepare_problem(const ScalarField& brightness, const ModelSpec& model,
                                       const LightSource& light, const Viewer& viewer,
                                       const SolverConfig& config) {
  const auto* ph = std::get_if<Phong>(&model);
  if (config.eikonal_fast_path && ph && ph->k_s() > 0.0 && ph->alpha() == 1.0 &&
      light.is_vertical() && viewer.is_vertical()) {
    ScalarField equivalent(brightness.grid());
    for (std::size_t k = 0; k < brightness.size(); ++k) {
      const double in = std::clamp(brightness[k], kBrightnessFloor, 1.0);
      const double f = eikonal_rhs(model, in);
      equivalent[k] = 1.0 / std::sqrt(1.0 + f * f);
    }
    return {Lambertian{}, std::move(equivalent), "eikonal"};
  }
  if (light.is_vertical() && viewer.is_vertical()) {
    // Brighter pixels than the model can produce are read as its flat-facing maximum.
    ScalarField clamped(brightness);
    const double top = max_brightness(model);
    for (auto& v : clamped) v = std::min(v, top);
    return {model, std::move(clamped), "fixed_point"};
  }
  return {model, brightness, "fixed_point"};
}

//! Applies the discrete operator once to every Inside node of w (Jacobi).
//! `feet` holds cached foot cells (nodes x searched controls) or is empty.
//! Returns the max of P * a3 at the minimisers.
inline double apply_operator(const OperatorContext& ctx, std::span<const std::size_t> nodes,
                             std::span<const NodeCoefficients> coeffs,
                             std::span<const detail::Bilinear> feet, const ScalarField& w,
                             ScalarField& out, std::size_t threads) {
  const std::size_t searched = ctx.controls->upper_count();
  std::vector<double> worker_max(std::max<std::size_t>(threads, 1), 0.0);
  std::copy(w.begin(), w.end(), out.begin());
  parallel_for(nodes.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t t) {
    double local = 0.0;
    for (std::size_t n = begin; n < end; ++n) {
      const std::size_t k = nodes[n];
      const NodeUpdate up =
          feet.empty() ? evaluate_node(ctx, coeffs[n], w.values(), k)
                       : evaluate_node_cached(ctx, coeffs[n], feet.subspan(n * searched, searched),
                                              w.values(), k);
      out[k] = up.value;
      local = std::max(local, coeffs[n].p * (*ctx.controls)[up.control].z);
    }
    worker_max[t] = local;
  });
  return *std::max_element(worker_max.begin(), worker_max.end());
}

inline SolveResult solve(const ScalarField& brightness, const Mask& mask,
                         const ModelSpec& model, const LightSource& light, const Viewer& viewer,
                         const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Grid& grid = mask.grid();
  if (!(brightness.grid() == grid)) throw InvalidArgument("image and mask grids differ");
  if (!(config.mu > 0.0)) throw InvalidArgument("mu must be positive");
  if (!(config.eta > 0.0)) throw InvalidArgument("eta must be positive");
  check_supported(model, light, viewer);

  const double mu = config.mu;
  const double h = config.h.value_or(std::min(grid.dx(), grid.dy()));
  if (!(h > 0.0)) throw InvalidArgument("step h must be positive");

  PreparedProblem problem = prepare_problem(brightness, model, light, viewer, config);
  const ControlSet controls = build_control_set(config.n_theta, config.n_phi, config.sphere);
  const bool lagged = problem.formulation == "fixed_point" &&
                      needs_lagged_gradient(problem.model, light, viewer);

  const std::vector<std::size_t> nodes = inside_nodes(mask);
  std::vector<std::size_t> pinned_nodes;
  for (const auto& p : config.pinned) {
    if (p.i >= grid.nx() || p.j >= grid.ny()) throw InvalidArgument("pinned node off the grid");
    pinned_nodes.push_back(grid.index(p.i, p.j));
  }

  ScalarField w = initial_iterate(mask, config.bc, mu);
  auto apply_pins = [&](ScalarField& field) {
    for (std::size_t n = 0; n < pinned_nodes.size(); ++n)
      field[pinned_nodes[n]] = kruzkov_forward(config.pinned[n].height, mu);
  };
  apply_pins(w);

  ScalarField next(grid);
  ScalarField height(grid, 0.0);
  Gradient lagged_grad{ScalarField(grid, 0.0), ScalarField(grid, 0.0)};

  OperatorContext ctx{grid,  problem.model, light, viewer, problem.brightness.values(), {}, {},
                      mu,    h,             &controls};
  if (lagged) {
    ctx.lagged_dx = lagged_grad.dx.values();
    ctx.lagged_dy = lagged_grad.dy.values();
  }

  std::vector<NodeCoefficients> coeffs(nodes.size());
  auto assemble_all = [&] {
    parallel_for(nodes.size(), config.threads, [&](std::size_t b, std::size_t e, std::size_t) {
      for (std::size_t n = b; n < e; ++n) coeffs[n] = assemble_coefficients(ctx, nodes[n]);
    });
  };
  std::vector<detail::Bilinear> feet;
  if (!lagged) {
    assemble_all();
    const std::size_t searched = controls.upper_count();
    feet.resize(nodes.size() * searched);
    parallel_for(nodes.size(), config.threads, [&](std::size_t b, std::size_t e, std::size_t) {
      for (std::size_t n = b; n < e; ++n)
        locate_feet(ctx, coeffs[n], nodes[n], std::span(feet).subspan(n * searched, searched));
    });
  }

  SolveReport report;
  report.formulation = problem.formulation;
  report.lagged_coefficients = lagged;

  for (std::size_t it = 1; it <= config.max_iter; ++it) {
    if (lagged) {
      for (std::size_t k = 0; k < w.size(); ++k)
        height[k] = mask[k] == NodeLabel::Inside ? detail::height_from_kruzkov(w[k], mu) : 0.0;
      lagged_grad = gradient_central(height, mask);
      ctx.lagged_dx = lagged_grad.dx.values();
      ctx.lagged_dy = lagged_grad.dy.values();
      assemble_all();
    }
    report.max_p_a3.push_back(apply_operator(ctx, nodes, coeffs, feet, w, next, config.threads));
    apply_pins(next);

    double update = 0.0;
    for (const std::size_t k : nodes) {
      update = std::max(update, std::abs(next[k] - w[k]));
      if (next[k] > w[k]) ++report.monotone_violations;
    }
    std::swap(w, next);
    report.iterations = it;
    report.residual_history.push_back(update);
    if (update <= config.eta) {
      report.termination = Termination::Converged;
      break;
    }
  }
  report.monotone_decrease = report.monotone_violations == 0;

  for (std::size_t k = 0; k < w.size(); ++k) {
    if (mask[k] == NodeLabel::Inside) {
      height[k] = detail::height_from_kruzkov(w[k], mu);
    } else if (const auto* f = std::get_if<DirichletField>(&config.bc)) {
      height[k] = std::isfinite(f->height[k]) ? f->height[k] : 0.0;
    } else {
      height[k] = 0.0;
    }
  }
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  SolveResult result{std::move(height), std::move(w), std::move(report)};
  if (result.report.termination != Termination::Converged) throw NoConvergence(std::move(result));
  return result;
}

//! Per-node |render(height) - I| on Inside nodes, zero elsewhere.
inline ScalarField residual_check(const ScalarField& height, const ScalarField& image,
                                  const Mask& mask, const ModelSpec& model,
                                  const LightSource& light, const Viewer& viewer) {
  const ScalarField rendered = render_image(height, mask, model, light, viewer, false);
  ScalarField residual(mask.grid(), 0.0);
  for (std::size_t k = 0; k < residual.size(); ++k)
    if (mask[k] == NodeLabel::Inside) residual[k] = std::abs(rendered[k] - image[k]);
  return residual;
}

}  // namespace sfs
