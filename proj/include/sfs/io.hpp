#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sfs/errors.hpp"
#include "sfs/grid.hpp"
#include "sfs/vec.hpp"

namespace sfs {

// ---------------------------------------------------------------------------
// PGM images
//
// Image row 0 is the top of the picture, i.e. grid row j = ny - 1.

enum class PgmEncoding { Binary, Ascii };

struct PgmImage {
  std::size_t width{0};
  std::size_t height{0};
  unsigned maxval{255};
  std::vector<std::uint16_t> pixels;  // row-major, top row first
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(const std::string& bytes) : bytes_(bytes) {}

  unsigned long next_number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_])))
      throw MalformedHeader("expected a number in the PGM header");
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(bytes_[pos_++] - '0');
      if (v > 0xFFFFFFFFul) throw MalformedHeader("PGM header value too large");
    }
    return v;
  }

  // Consumes the single whitespace byte that separates the header from binary data.
  void end_header() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      throw MalformedHeader("missing whitespace after PGM header");
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_{2};
};

}  // namespace detail

inline PgmImage parse_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw MalformedHeader("not a P2/P5 graymap");
  const bool binary = bytes[1] == '5';
  detail::PgmHeaderReader header(bytes);
  PgmImage img;
  img.width = header.next_number();
  img.height = header.next_number();
  const unsigned long maxval = header.next_number();
  if (img.width == 0 || img.height == 0) throw MalformedHeader("PGM dimensions must be positive");
  if (maxval == 0 || maxval > 65535) throw UnsupportedDepth("PGM maxval must be in [1, 65535]");
  img.maxval = static_cast<unsigned>(maxval);
  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);

  if (binary) {
    header.end_header();
    const std::size_t bpp = img.maxval > 255 ? 2 : 1;
    const std::size_t start = header.position();
    if (bytes.size() - start < count * bpp) throw MalformedHeader("PGM raster is truncated");
    for (std::size_t n = 0; n < count; ++n) {
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + start + n * bpp);
      img.pixels[n] = bpp == 2 ? static_cast<std::uint16_t>((p[0] << 8) | p[1]) : p[0];
    }
  } else {
    for (std::size_t n = 0; n < count; ++n) {
      const unsigned long v = header.next_number();
      img.pixels[n] = static_cast<std::uint16_t>(v);
    }
  }
  for (const auto v : img.pixels)
    if (v > img.maxval) throw MalformedHeader("PGM sample exceeds maxval");
  return img;
}

inline std::string serialize_pgm(const PgmImage& img, PgmEncoding encoding = PgmEncoding::Binary) {
  std::string out = (encoding == PgmEncoding::Binary ? "P5\n" : "P2\n") +
                    std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                    std::to_string(img.maxval) + "\n";
  if (encoding == PgmEncoding::Binary) {
    const bool wide = img.maxval > 255;
    for (const auto v : img.pixels) {
      if (wide) out.push_back(static_cast<char>(v >> 8));
      out.push_back(static_cast<char>(v & 0xFF));
    }
  } else {
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        if (c) out.push_back(' ');
        out += std::to_string(img.pixels[r * img.width + c]);
      }
      out.push_back('\n');
    }
  }
  return out;
}

//! Grid used for images read from disk: [-1, 1] along the longer side, same spacing
//! along the other.
inline Grid image_grid(std::size_t width, std::size_t height) {
  const double step = 2.0 / static_cast<double>(std::max(width, height) - 1);
  return Grid::centered(width, height, step * static_cast<double>(width - 1),
                        step * static_cast<double>(height - 1));
}

inline ScalarField pgm_to_field(const PgmImage& img, std::optional<Grid> grid = std::nullopt) {
  if (img.width < 2 || img.height < 2) throw InvalidArgument("image needs at least 2x2 pixels");
  const Grid g = grid.value_or(image_grid(img.width, img.height));
  if (g.nx() != img.width || g.ny() != img.height)
    throw InvalidArgument("grid does not match image size");
  ScalarField f(g);
  const double scale = 1.0 / static_cast<double>(img.maxval);
  for (std::size_t r = 0; r < img.height; ++r)
    for (std::size_t c = 0; c < img.width; ++c)
      f(c, img.height - 1 - r) = static_cast<double>(img.pixels[r * img.width + c]) * scale;
  return f;
}

inline PgmImage field_to_pgm(const ScalarField& f, unsigned maxval = 255) {
  if (maxval == 0 || maxval > 65535) throw UnsupportedDepth("PGM maxval must be in [1, 65535]");
  const Grid& g = f.grid();
  PgmImage img{g.nx(), g.ny(), maxval, std::vector<std::uint16_t>(g.size())};
  for (std::size_t r = 0; r < img.height; ++r)
    for (std::size_t c = 0; c < img.width; ++c) {
      const double v = std::clamp(f(c, img.height - 1 - r), 0.0, 1.0);
      img.pixels[r * img.width + c] = static_cast<std::uint16_t>(std::lround(v * maxval));
    }
  return img;
}

inline ScalarField read_image_pgm(const std::string& path, std::optional<Grid> grid = std::nullopt) {
  return pgm_to_field(parse_pgm(detail::read_file(path)), grid);
}

inline void write_image_pgm(const ScalarField& f, const std::string& path, unsigned maxval = 255,
                            PgmEncoding encoding = PgmEncoding::Binary) {
  detail::write_file(path, serialize_pgm(field_to_pgm(f, maxval), encoding));
}

//! Mask from a graymap: non-zero pixels are in the object.
inline Mask read_mask_pgm(const std::string& path, std::optional<Grid> grid = std::nullopt) {
  const ScalarField f = read_image_pgm(path, grid);
  std::vector<std::uint8_t> flags(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) flags[k] = f[k] > 0.0 ? 1 : 0;
  return build_mask_from_flags(f.grid(), flags);
}

//! Writes Inside nodes as white and everything else as black.
inline void write_mask_pgm(const Mask& mask, const std::string& path) {
  ScalarField f(mask.grid(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k)
    f[k] = mask[k] == NodeLabel::Inside ? 1.0 : 0.0;
  write_image_pgm(f, path);
}

// ---------------------------------------------------------------------------
// Mesh export

struct MeshCounts {
  std::size_t vertices{0};
  std::size_t triangles{0};
};

//! OBJ text with one vertex per Inside node, in storage order, and two
//! triangles per cell whose four corners are Inside.
inline std::string mesh_obj(const ScalarField& height, const Mask& mask,
                            MeshCounts* counts = nullptr) {
  const Grid& g = height.grid();
  if (!(mask.grid() == g)) throw InvalidArgument("mask and height grids differ");
  std::vector<std::size_t> vertex(g.size(), 0);  // 1-based, 0 = none
  std::string out;
  char line[192];
  std::size_t next = 1;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (mask[k] != NodeLabel::Inside) continue;
    const auto [i, j] = g.coords(k);
    const Vec2 p = g.position(i, j);
    std::snprintf(line, sizeof line, "v %.17g %.17g %.17g\n", p.x, p.y, height[k]);
    out += line;
    vertex[k] = next++;
  }
  std::size_t triangles = 0;
  for (std::size_t j = 0; j + 1 < g.ny(); ++j)
    for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
      const std::size_t a = vertex[g.index(i, j)], b = vertex[g.index(i + 1, j)];
      const std::size_t c = vertex[g.index(i + 1, j + 1)], d = vertex[g.index(i, j + 1)];
      if (!a || !b || !c || !d) continue;
      std::snprintf(line, sizeof line, "f %zu %zu %zu\nf %zu %zu %zu\n", a, b, c, a, c, d);
      out += line;
      triangles += 2;
    }
  if (counts) *counts = {next - 1, triangles};
  return out;
}

inline MeshCounts export_mesh_obj(const ScalarField& height, const Mask& mask,
                                  const std::string& path) {
  MeshCounts counts;
  detail::write_file(path, mesh_obj(height, mask, &counts));
  return counts;
}

// ---------------------------------------------------------------------------
// Height dumps: "nx N", "ny N", "dx D", "dy D", then ny rows top row first.

inline std::string format_height_dump(const ScalarField& f) {
  const Grid& g = f.grid();
  char buf[64];
  std::string out = "nx " + std::to_string(g.nx()) + "\nny " + std::to_string(g.ny()) + "\n";
  std::snprintf(buf, sizeof buf, "dx %.17g\ndy %.17g\n", g.dx(), g.dy());
  out += buf;
  for (std::size_t r = 0; r < g.ny(); ++r) {
    const std::size_t j = g.ny() - 1 - r;
    for (std::size_t i = 0; i < g.nx(); ++i) {
      std::snprintf(buf, sizeof buf, i ? " %.17g" : "%.17g", f(i, j));
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

inline ScalarField parse_height_dump(const std::string& text) {
  std::istringstream in(text);
  auto field = [&](const char* key) {
    std::string name;
    double v = 0.0;
    if (!(in >> name >> v) || name != key)
      throw MalformedHeader(std::string("height dump: expected '") + key + "'");
    return v;
  };
  const double nx = field("nx"), ny = field("ny"), dx = field("dx"), dy = field("dy");
  if (nx < 2 || ny < 2 || nx != std::floor(nx) || ny != std::floor(ny))
    throw MalformedHeader("height dump: bad dimensions");
  const auto w = static_cast<std::size_t>(nx), h = static_cast<std::size_t>(ny);
  const Grid g(w, h, dx, dy, -0.5 * dx * (nx - 1), -0.5 * dy * (ny - 1));
  ScalarField f(g);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t i = 0; i < w; ++i)
      if (!(in >> f(i, h - 1 - r))) throw MalformedHeader("height dump: truncated data");
  return f;
}

inline void write_height_dump(const ScalarField& f, const std::string& path) {
  detail::write_file(path, format_height_dump(f));
}

inline ScalarField read_height_dump(const std::string& path) {
  return parse_height_dump(detail::read_file(path));
}

// ---------------------------------------------------------------------------
// Run configuration: "key = value" lines, '#' starts a comment.

class RunConfig {
 public:
  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "scene",       "nx",          "ny",          "width",        "height",
        "wavelength_x", "wavelength_y", "image",      "mask",         "model",
        "sigma",       "k_d",         "k_s",         "alpha",        "light",
        "viewer",      "mu",          "h",           "eta",          "max_iter",
        "bc",          "bc_field",    "pinned",      "n_theta",      "n_phi",
        "control_sphere", "quantize", "reference_height",
        "image_out",   "mask_out",    "truth_out",   "height_out",   "mesh_out",
        "report_out",  "errors_out",  "table",       "table_out",   "bench_size",   "threads"};
    return keys;
  }

  static RunConfig parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (!known_keys().count(key))
        throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'");
      if (cfg.values_.count(key))
        throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");
    values_[key] = value;
  }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? to_number(key, require(key)) : fallback;
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return to_number(key, require(key));
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const double v = to_number(key, require(key));
    if (v < 0 || v != std::floor(v)) throw ConfigError("'" + key + "' must be a whole number");
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = require(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' must be true or false");
  }

  //! Three comma- or space-separated components.
  std::optional<Vec3> vector(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const auto parts = split_numbers(key, require(key));
    if (parts.size() != 3) throw ConfigError("'" + key + "' needs three components");
    return Vec3{parts[0], parts[1], parts[2]};
  }

  //! "i j height" triples separated by ';'.
  std::vector<std::array<double, 3>> triples(const std::string& key) const {
    std::vector<std::array<double, 3>> out;
    if (!has(key)) return out;
    std::istringstream in(require(key));
    std::string item;
    while (std::getline(in, item, ';')) {
      if (trim(item).empty()) continue;
      const auto parts = split_numbers(key, item);
      if (parts.size() != 3) throw ConfigError("'" + key + "' entries need three numbers");
      out.push_back({parts[0], parts[1], parts[2]});
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static double to_number(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' is not a number: " + text);
    }
    if (!trim(text.substr(used)).empty()) throw ConfigError("'" + key + "' is not a number: " + text);
    return v;
  }

  static std::vector<double> split_numbers(const std::string& key, std::string text) {
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(to_number(key, tok));
    return out;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace sfs
