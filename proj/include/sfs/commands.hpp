#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sfs/errors.hpp"
#include "sfs/io.hpp"
#include "sfs/metrics.hpp"
#include "sfs/reflectance.hpp"
#include "sfs/scenes.hpp"
#include "sfs/solver.hpp"

namespace sfs {

//! Shared settings for the command-line commands.
struct CommandOptions {
  std::filesystem::path out_dir{"."};
  std::optional<std::size_t> threads;  // overrides the config and SFS_THREADS
  std::ostream* log{nullptr};          // human-readable progress, may be null
};

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string resolve(const CommandOptions& opts, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p.string() : (opts.out_dir / p).string();
}

inline void say(const CommandOptions& opts, const std::string& line) {
  if (opts.log) *opts.log << line << '\n';
}

//! Key = value lines, one per entry.
class KeyValueWriter {
 public:
  void add(const std::string& key, const std::string& value) { out_ << key << " = " << value << '\n'; }
  void add(const std::string& key, double value) { add(key, format_number(value)); }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
  void add(const std::string& key, const std::vector<double>& values) {
    std::string joined;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k) joined += ' ';
      joined += format_number(values[k]);
    }
    add(key, joined);
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

// Config values may be rejected by the library constructors; report them as
// configuration errors.
template <typename F>
auto config_checked(const std::string& what, F&& make) {
  try {
    return make();
  } catch (const InvalidArgument& e) {
    throw ConfigError(what + ": " + e.what());
  } catch (const DegenerateView& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config interpretation

inline ModelSpec model_from_config(const RunConfig& cfg) {
  const std::string name = cfg.get("model", "lambertian");
  return detail::config_checked("model", [&]() -> ModelSpec {
    if (name == "lambertian") return Lambertian{};
    if (name == "oren_nayar") return OrenNayar(cfg.number("sigma", 0.0));
    if (name == "phong") {
      const double k_s = cfg.number("k_s", 0.0);
      return Phong(cfg.number("k_d", 1.0 - k_s), k_s, cfg.number("alpha", 1.0));
    }
    throw ConfigError("unknown model '" + name + "' (lambertian, oren_nayar, phong)");
  });
}

//! Unit direction from `key`, vertical when absent. Vectors off unit length
//! by more than 1e-6 are normalized with a warning.
struct DirectionEntry {
  Vec3 direction{0.0, 0.0, 1.0};
  std::optional<Vec3> given;  // set when the config value was rescaled
};

inline DirectionEntry direction_from_config(const RunConfig& cfg, const std::string& key,
                                            const CommandOptions& opts) {
  DirectionEntry entry;
  const auto v = cfg.vector(key);
  if (!v) return entry;
  const double n = norm(*v);
  if (!(n > 0.0)) throw ConfigError("'" + key + "' must be a nonzero vector");
  entry.direction = normalized(*v);
  if (std::abs(n - 1.0) > 1e-6) {
    entry.given = *v;
    detail::say(opts, "warning: " + key + " has length " + detail::format_number(n) +
                          "; normalized");
  }
  return entry;
}

inline LightSource light_from_config(const RunConfig& cfg, const CommandOptions& opts) {
  const DirectionEntry e = direction_from_config(cfg, "light", opts);
  return detail::config_checked("light", [&] { return LightSource(e.direction); });
}

inline Viewer viewer_from_config(const RunConfig& cfg, const CommandOptions& opts) {
  const DirectionEntry e = direction_from_config(cfg, "viewer", opts);
  return detail::config_checked("viewer", [&] { return Viewer(e.direction); });
}

//! Centred grid from nx, ny, width, height; the basin defaults to its own grid.
inline Grid grid_from_config(const RunConfig& cfg) {
  const bool basin = cfg.get("scene") == "basin" || cfg.get("scene") == "basin_radial";
  const Grid fallback = basin ? basin_grid() : Grid::centered(256, 256, 2.0, 2.0);
  const std::size_t nx = cfg.count("nx", fallback.nx());
  const std::size_t ny = cfg.count("ny", nx);
  const double width = cfg.number("width", fallback.extent_x());
  const double height = cfg.number("height", width);
  return detail::config_checked("grid", [&] { return Grid::centered(nx, ny, width, height); });
}

inline SceneKind scene_from_config(const RunConfig& cfg) {
  const std::string name = cfg.require("scene");
  if (name == "sphere") return SphereScene{};
  if (name == "tent") return TentScene{};
  if (name == "basin") return BasinScene{BasinForm::Printed};
  if (name == "basin_radial") return BasinScene{BasinForm::Radial};
  if (name == "sinusoid")
    return SinusoidScene{cfg.optional_number("wavelength_x"), cfg.optional_number("wavelength_y")};
  if (name == "vase") return VaseScene{};
  throw ConfigError("unknown scene '" + name +
                    "' (sphere, tent, basin, basin_radial, sinusoid, vase)");
}

inline std::size_t thread_count(const RunConfig& cfg, const CommandOptions& opts) {
  if (opts.threads) return std::max<std::size_t>(1, *opts.threads);
  return std::max<std::size_t>(1, cfg.count("threads", default_thread_count()));
}

//! Solver settings; `bc = field` reads heights from the `bc_field` dump.
inline SolverConfig solver_config_from(const RunConfig& cfg, const Grid& grid,
                                       const CommandOptions& opts) {
  SolverConfig sc;
  sc.mu = cfg.number("mu", sc.mu);
  sc.h = cfg.optional_number("h");
  sc.eta = cfg.number("eta", sc.eta);
  sc.max_iter = cfg.count("max_iter", sc.max_iter);
  sc.n_theta = cfg.count("n_theta", sc.n_theta);
  sc.n_phi = cfg.count("n_phi", sc.n_phi);
  sc.threads = thread_count(cfg, opts);
  if (!(sc.mu > 0.0)) throw ConfigError("'mu' must be positive");
  if (!(sc.eta > 0.0)) throw ConfigError("'eta' must be positive");
  if (sc.h && !(*sc.h > 0.0)) throw ConfigError("'h' must be positive");
  if (sc.n_theta < 2 || sc.n_phi < 1) throw ConfigError("control set needs n_theta >= 2, n_phi >= 1");

  const std::string sphere = cfg.get("control_sphere", "full");
  if (sphere == "full") sc.sphere = ControlSphere::Full;
  else if (sphere == "upper") sc.sphere = ControlSphere::Upper;
  else throw ConfigError("'control_sphere' must be full or upper");

  const std::string bc = cfg.get("bc", "zero");
  if (bc == "zero") {
    sc.bc = DirichletZero{};
  } else if (bc == "state") {
    sc.bc = StateConstraint{};
  } else if (bc == "field") {
    ScalarField g = read_height_dump(detail::resolve(opts, cfg.require("bc_field")));
    if (g.grid().nx() != grid.nx() || g.grid().ny() != grid.ny())
      throw ConfigError("'bc_field' size does not match the image");
    ScalarField on_grid(grid);
    std::copy(g.begin(), g.end(), on_grid.begin());
    sc.bc = DirichletField{std::move(on_grid)};
  } else {
    throw ConfigError("'bc' must be zero, field or state");
  }

  for (const auto& t : cfg.triples("pinned")) {
    if (t[0] < 0 || t[1] < 0 || t[0] != std::floor(t[0]) || t[1] != std::floor(t[1]))
      throw ConfigError("'pinned' node indices must be whole numbers");
    const auto i = static_cast<std::size_t>(t[0]);
    const auto j = static_cast<std::size_t>(t[1]);
    if (i >= grid.nx() || j >= grid.ny()) throw ConfigError("'pinned' node off the grid");
    sc.pinned.push_back({i, j, t[2]});
  }
  return sc;
}

// ---------------------------------------------------------------------------
// render

struct RenderOutcome {
  std::string image_path;
  std::string mask_path;
  std::optional<std::string> truth_path;
  std::size_t inside{0};
};

//! Scene -> image and mask files, plus the ground-truth height dump when
//! `truth_out` is set.
inline RenderOutcome cmd_render(const RunConfig& cfg, const CommandOptions& opts) {
  const Grid grid = grid_from_config(cfg);
  const SceneKind kind = scene_from_config(cfg);
  const Scene scene = detail::config_checked("scene", [&] { return make_scene({kind, grid}); });
  const ModelSpec model = model_from_config(cfg);
  const LightSource light = light_from_config(cfg, opts);
  const Viewer viewer = viewer_from_config(cfg, opts);
  const ScalarField image =
      render_image(scene.height, scene.mask, model, light, viewer, cfg.flag("quantize", true));

  std::filesystem::create_directories(opts.out_dir);
  RenderOutcome out;
  out.image_path = detail::resolve(opts, cfg.get("image_out", "image.pgm"));
  out.mask_path = detail::resolve(opts, cfg.get("mask_out", "mask.pgm"));
  write_image_pgm(image, out.image_path);
  write_mask_pgm(scene.mask, out.mask_path);
  if (cfg.has("truth_out")) {
    out.truth_path = detail::resolve(opts, cfg.get("truth_out"));
    write_height_dump(scene.height, *out.truth_path);
  }
  out.inside = count_label(scene.mask, NodeLabel::Inside);
  detail::say(opts, "rendered " + cfg.get("scene") + " " + std::to_string(grid.nx()) + "x" +
                        std::to_string(grid.ny()) + " with " + model_name(model) + " (" +
                        std::to_string(out.inside) + " inside nodes) -> " + out.image_path);
  return out;
}

// ---------------------------------------------------------------------------
// reconstruct

inline std::string format_report(const SolveReport& r, const LightSource& light,
                                 const Viewer& viewer, const ModelSpec& model) {
  detail::KeyValueWriter kv;
  kv.add("termination", to_string(r.termination));
  kv.add("iterations", r.iterations);
  kv.add("wall_time", r.wall_time);
  kv.add("formulation", r.formulation);
  kv.add("lagged_coefficients", r.lagged_coefficients);
  kv.add("monotone_decrease", r.monotone_decrease);
  kv.add("monotone_violations", r.monotone_violations);
  kv.add("final_residual", r.residual_history.empty() ? 0.0 : r.residual_history.back());
  kv.add("model", model_name(model));
  const Vec3& l = light.direction();
  const Vec3& v = viewer.direction();
  kv.add("light", detail::format_number(l.x) + " " + detail::format_number(l.y) + " " +
                      detail::format_number(l.z));
  kv.add("viewer", detail::format_number(v.x) + " " + detail::format_number(v.y) + " " +
                       detail::format_number(v.z));
  kv.add("residual_history", r.residual_history);
  kv.add("max_p_a3", r.max_p_a3);
  return kv.str();
}

struct ReconstructOutcome {
  SolveResult result;
  bool converged{true};
  std::string height_path;
};

inline ScalarField image_from_config(const RunConfig& cfg, const CommandOptions& opts,
                                     std::optional<Grid> grid) {
  return read_image_pgm(detail::resolve(opts, cfg.require("image")), grid);
}

//! Grid for an input image: width/height from the config when given,
//! otherwise [-1, 1] along the longer side.
inline Grid input_grid(const RunConfig& cfg, const CommandOptions& opts) {
  const PgmImage img = parse_pgm(detail::read_file(detail::resolve(opts, cfg.require("image"))));
  if (!cfg.has("width") && !cfg.has("height")) return image_grid(img.width, img.height);
  const Grid fallback = image_grid(img.width, img.height);
  const double width = cfg.number("width", fallback.extent_x());
  const double height = cfg.number("height", width * static_cast<double>(img.height - 1) /
                                                 static_cast<double>(img.width - 1));
  return detail::config_checked("grid",
                                [&] { return Grid::centered(img.width, img.height, width, height); });
}

inline Mask mask_from_config(const RunConfig& cfg, const CommandOptions& opts, const Grid& grid) {
  if (cfg.has("mask")) return read_mask_pgm(detail::resolve(opts, cfg.get("mask")), grid);
  std::vector<std::uint8_t> all(grid.size(), 1);
  return build_mask_from_flags(grid, all);
}

//! Image (+ mask) -> height dump, optional mesh, and a key = value report.
//! On NoConvergence the partial result is still written.
inline ReconstructOutcome cmd_reconstruct(const RunConfig& cfg, const CommandOptions& opts) {
  const Grid grid = input_grid(cfg, opts);
  const ScalarField image = image_from_config(cfg, opts, grid);
  const Mask mask = mask_from_config(cfg, opts, grid);
  const ModelSpec model = model_from_config(cfg);
  const DirectionEntry light_entry = direction_from_config(cfg, "light", opts);
  const DirectionEntry viewer_entry = direction_from_config(cfg, "viewer", opts);
  const LightSource light =
      detail::config_checked("light", [&] { return LightSource(light_entry.direction); });
  const Viewer viewer =
      detail::config_checked("viewer", [&] { return Viewer(viewer_entry.direction); });
  const SolverConfig sc = solver_config_from(cfg, grid, opts);

  ReconstructOutcome out = [&]() -> ReconstructOutcome {
    try {
      return {solve(image, mask, model, light, viewer, sc), true, {}};
    } catch (const NoConvergence& e) {
      return {e.partial(), false, {}};
    } catch (const UnsupportedConfiguration& e) {
      throw ConfigError(e.what());
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("solver: ") + e.what());
    }
  }();

  std::filesystem::create_directories(opts.out_dir);
  out.height_path = detail::resolve(opts, cfg.get("height_out", "height.txt"));
  write_height_dump(out.result.height, out.height_path);
  if (cfg.has("mesh_out"))
    export_mesh_obj(out.result.height, mask, detail::resolve(opts, cfg.get("mesh_out")));
  std::string report = format_report(out.result.report, light, viewer, model);
  for (const auto& [key, entry] : {std::pair{"light_given", light_entry}, {"viewer_given", viewer_entry}})
    if (entry.given)
      report += std::string(key) + " = " + detail::format_number(entry.given->x) + " " +
                detail::format_number(entry.given->y) + " " + detail::format_number(entry.given->z) + "\n";
  detail::write_file(detail::resolve(opts, cfg.get("report_out", "report.txt")), report);

  const SolveReport& r = out.result.report;
  detail::say(opts, std::string(out.converged ? "converged" : "did not converge") + " after " +
                        std::to_string(r.iterations) + " sweeps in " +
                        detail::format_fixed(r.wall_time, 2) + " s (" + r.formulation + ")");
  return out;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOutcome {
  ErrorReport image;
  std::optional<ErrorReport> surface;
};

inline void add_errors(detail::KeyValueWriter& kv, const std::string& prefix, const ErrorReport& e) {
  kv.add(prefix + "_l2", e.l2);
  kv.add(prefix + "_linf", e.linf);
  kv.add(prefix + "_err1", e.err1);
  kv.add(prefix + "_err2", e.err2);
  kv.add(prefix + "_n", e.n);
}

//! Re-renders the reconstruction from `height_out` and compares it with the
//! input image; compares heights with `reference_height` when given.
inline EvaluateOutcome cmd_evaluate(const RunConfig& cfg, const CommandOptions& opts) {
  const Grid grid = input_grid(cfg, opts);
  const ScalarField image = image_from_config(cfg, opts, grid);
  const Mask mask = mask_from_config(cfg, opts, grid);
  const ModelSpec model = model_from_config(cfg);
  const LightSource light = light_from_config(cfg, opts);
  const Viewer viewer = viewer_from_config(cfg, opts);
  const bool quantize = cfg.flag("quantize", true);

  auto load_height = [&](const std::string& key) {
    const ScalarField dump = read_height_dump(detail::resolve(opts, cfg.get(key, "height.txt")));
    if (dump.grid().nx() != grid.nx() || dump.grid().ny() != grid.ny())
      throw ConfigError("'" + key + "' size does not match the image");
    ScalarField f(grid);
    std::copy(dump.begin(), dump.end(), f.begin());
    return f;
  };

  const ScalarField height = load_height("height_out");
  const ScalarField rerendered = render_image(height, mask, model, light, viewer, quantize);
  EvaluateOutcome out;
  out.image = image_errors(image, rerendered, mask, quantize);
  if (cfg.has("reference_height")) out.surface = surface_errors(load_height("reference_height"), height, mask);

  detail::KeyValueWriter kv;
  add_errors(kv, "image", out.image);
  if (out.surface) add_errors(kv, "surface", *out.surface);
  std::filesystem::create_directories(opts.out_dir);
  detail::write_file(detail::resolve(opts, cfg.get("errors_out", "errors.txt")), kv.str());

  std::string line = "image L2 " + detail::format_fixed(out.image.l2, 4) + " Linf " +
                     detail::format_fixed(out.image.linf, 4);
  if (out.surface)
    line += ", surface L2 " + detail::format_fixed(out.surface->l2, 4) + " Linf " +
            detail::format_fixed(out.surface->linf, 4);
  detail::say(opts, line);
  return out;
}

// ---------------------------------------------------------------------------
// bench

struct NamedModel {
  std::string name;
  ModelSpec model;
};

inline std::vector<NamedModel> sphere_models() {
  return {{"LAM", Lambertian{}},
          {"ON-00", OrenNayar(0.0)},
          {"ON-04", OrenNayar(0.4)},
          {"ON-08", OrenNayar(0.8)},
          {"PH-s00", Phong::with_specular(0.0)},
          {"PH-s04", Phong::with_specular(0.4)},
          {"PH-s08", Phong::with_specular(0.8)}};
}

inline std::vector<NamedModel> tent_models(bool phong) {
  if (phong)
    return {{"LAM", Lambertian{}},
            {"PH1", Phong::with_specular(0.1)},
            {"PH3", Phong::with_specular(0.3)},
            {"PH5", Phong::with_specular(0.5)}};
  return {{"LAM", Lambertian{}},
          {"ON1", OrenNayar(0.1)},
          {"ON3", OrenNayar(0.3)},
          {"ON5", OrenNayar(0.5)}};
}

inline std::vector<NamedModel> vase_models() {
  return {{"LAM", Lambertian{}},
          {"ON-02", OrenNayar(0.2)},
          {"ON-04", OrenNayar(0.4)},
          {"PH-s02", Phong::with_specular(0.2)},
          {"PH-s04", Phong::with_specular(0.4)}};
}

//! Generator x reconstructor surface errors; entry [r][c] reconstructs the
//! image of model c with model r.
struct CrossMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<ErrorReport>> errors;
};

inline CrossMatrix tent_cross_matrix(const Grid& grid, bool phong, const SolverConfig& sc) {
  const Scene scene = make_tent(grid);
  const auto models = tent_models(phong);
  const LightSource light = LightSource::vertical();
  const Viewer viewer = Viewer::vertical();
  std::vector<ScalarField> images;
  for (const auto& m : models)
    images.push_back(render_image(scene.height, scene.mask, m.model, light, viewer, true));
  CrossMatrix out;
  for (const auto& m : models) out.names.push_back(m.name);
  out.errors.assign(models.size(), {});
  for (std::size_t r = 0; r < models.size(); ++r)
    for (std::size_t c = 0; c < models.size(); ++c) {
      const SolveResult res = solve(images[c], scene.mask, models[r].model, light, viewer, sc);
      out.errors[r].push_back(surface_errors(scene.height, res.height, scene.mask));
    }
  return out;
}

struct BenchRow {
  std::string model;
  SolveReport report;
  ErrorReport surface;
  std::optional<ErrorReport> image;
};

//! Matched render/reconstruct runs under vertical light and viewer.
inline std::vector<BenchRow> matched_runs(const Scene& scene, const std::vector<NamedModel>& models,
                                          const SolverConfig& sc, bool with_image) {
  const LightSource light = LightSource::vertical();
  const Viewer viewer = Viewer::vertical();
  std::vector<BenchRow> rows;
  for (const auto& m : models) {
    const ScalarField image = render_image(scene.height, scene.mask, m.model, light, viewer, true);
    SolveResult res = solve(image, scene.mask, m.model, light, viewer, sc);
    BenchRow row{m.name, res.report, surface_errors(scene.height, res.height, scene.mask), {}};
    if (with_image) {
      const ScalarField again = render_image(res.height, scene.mask, m.model, light, viewer, true);
      row.image = image_errors(image, again, scene.mask, true);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

//! Runs one of the benchmark grids (`table` = sphere, tent_on, tent_ph, vase,
//! vase_bc) and returns it as comma-separated text. The step defaults to a
//! third of the grid spacing.
inline std::string cmd_bench(const RunConfig& cfg, const CommandOptions& opts) {
  const std::string which = cfg.require("table");
  const std::size_t n = cfg.count("bench_size", which.rfind("tent", 0) == 0 ? 128 : 256);
  const Grid grid = Grid::centered(n, n, 2.0, 2.0);
  SolverConfig sc = solver_config_from(cfg, grid, opts);
  if (!sc.h) sc.h = grid.dx() / 3.0;

  std::ostringstream csv;
  auto f4 = [](double v) { return detail::format_fixed(v, 4); };
  if (which == "sphere") {
    csv << "model,iterations,seconds,image_l2,image_linf,surface_l2,surface_linf\n";
    for (const auto& row : matched_runs(make_sphere(grid), sphere_models(), sc, true))
      csv << row.model << ',' << row.report.iterations << ',' << detail::format_fixed(row.report.wall_time, 2)
          << ',' << f4(row.image->l2) << ',' << f4(row.image->linf) << ',' << f4(row.surface.l2)
          << ',' << f4(row.surface.linf) << '\n';
  } else if (which == "tent_on" || which == "tent_ph") {
    const CrossMatrix m = tent_cross_matrix(grid, which == "tent_ph", sc);
    csv << "norm,reconstructor";
    for (const auto& name : m.names) csv << ',' << name;
    csv << '\n';
    for (const char* norm_name : {"L2", "Linf"})
      for (std::size_t r = 0; r < m.names.size(); ++r) {
        csv << norm_name << ',' << m.names[r];
        for (const auto& e : m.errors[r]) csv << ',' << f4(std::string(norm_name) == "L2" ? e.l2 : e.linf);
        csv << '\n';
      }
  } else if (which == "vase" || which == "vase_bc") {
    const Scene scene = make_vase(grid);
    if (which == "vase_bc") sc.bc = DirichletField{*scene.boundary};
    else sc.bc = DirichletZero{};
    csv << "model,iterations,seconds,surface_l2,surface_linf\n";
    for (const auto& row : matched_runs(scene, vase_models(), sc, false))
      csv << row.model << ',' << row.report.iterations << ',' << detail::format_fixed(row.report.wall_time, 2)
          << ',' << f4(row.surface.l2) << ',' << f4(row.surface.linf) << '\n';
  } else {
    throw ConfigError("'table' must be sphere, tent_on, tent_ph, vase or vase_bc");
  }

  std::filesystem::create_directories(opts.out_dir);
  detail::write_file(detail::resolve(opts, cfg.get("table_out", "table.csv")), csv.str());
  detail::say(opts, csv.str());
  return csv.str();
}

}  // namespace sfs
