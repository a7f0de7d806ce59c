// Renders the hemisphere benchmark with each reflectance model, reconstructs
// it with the matching model and prints the error table.
//
//   reconstruct_sphere [grid size] [output directory]

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "sfs/commands.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 128;
  const std::filesystem::path out = argc > 2 ? argv[2] : "sphere_out";
  std::filesystem::create_directories(out);

  const sfs::Grid grid = sfs::Grid::centered(n, n, 2.0, 2.0);
  const sfs::Scene sphere = sfs::make_sphere(grid);
  const auto light = sfs::LightSource::vertical();
  const auto viewer = sfs::Viewer::vertical();
  sfs::SolverConfig config;
  config.h = grid.dx() / 3.0;

  std::printf("%-8s %6s %8s %8s %8s %8s\n", "model", "iter", "L2(I)", "Linf(I)", "L2(S)", "Linf(S)");
  for (const auto& [name, model] : sfs::sphere_models()) {
    const sfs::ScalarField image = sfs::render_image(sphere.height, sphere.mask, model, light, viewer, true);
    const sfs::SolveResult res = sfs::solve(image, sphere.mask, model, light, viewer, config);
    const sfs::ScalarField again = sfs::render_image(res.height, sphere.mask, model, light, viewer, true);
    const sfs::ErrorReport img = sfs::image_errors(image, again, sphere.mask, true);
    const sfs::ErrorReport surf = sfs::surface_errors(sphere.height, res.height, sphere.mask);
    std::printf("%-8s %6zu %8.4f %8.4f %8.4f %8.4f\n", name.c_str(), res.report.iterations, img.l2,
                img.linf, surf.l2, surf.linf);
    sfs::export_mesh_obj(res.height, sphere.mask, (out / (name + ".obj")).string());
  }
  sfs::write_image_pgm(sfs::render_image(sphere.height, sphere.mask, sfs::Lambertian{}, light, viewer, true),
                       (out / "input.pgm").string());
  return 0;
}
