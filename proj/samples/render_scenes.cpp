// Writes every synthetic scene as Lambertian images, a mask and a height dump
// (the vase dump also carries its rim heights for Dirichlet data).
//
//   render_scenes [output directory]

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sfs/io.hpp"
#include "sfs/reflectance.hpp"
#include "sfs/scenes.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "scenes_out";
  std::filesystem::create_directories(out);

  const sfs::Grid square = sfs::Grid::centered(256, 256, 2.0, 2.0);
  const std::vector<std::pair<std::string, sfs::Scene>> scenes = {
      {"sphere", sfs::make_sphere(square)},
      {"tent", sfs::make_tent(square)},
      {"basin", sfs::make_basin(sfs::basin_grid(), sfs::BasinForm::Radial)},
      {"sinusoid", sfs::make_sinusoid(square, 0.25, 0.25)},
      {"vase", sfs::make_vase(square)},
  };
  const auto viewer = sfs::Viewer::vertical();
  const std::pair<std::string, sfs::LightSource> lights[] = {
      {"vertical", sfs::LightSource::vertical()},
      {"oblique", sfs::LightSource::normalized({1.0, 0.0, 1.0})},
  };

  for (const auto& [name, scene] : scenes) {
    const std::string stem = (out / name).string();
    for (const auto& [light_name, light] : lights)
      sfs::write_image_pgm(
          sfs::render_image(scene.height, scene.mask, sfs::Lambertian{}, light, viewer, true),
          stem + "_" + light_name + ".pgm");
    sfs::write_mask_pgm(scene.mask, stem + "_mask.pgm");
    sfs::write_height_dump(scene.height, stem + "_height.txt");
    std::printf("%-9s %zux%zu, %zu inside nodes\n", name.c_str(), scene.mask.grid().nx(),
                scene.mask.grid().ny(), sfs::count_label(scene.mask, sfs::NodeLabel::Inside));
  }
  return 0;
}
