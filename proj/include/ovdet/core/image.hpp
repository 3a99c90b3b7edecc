#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

namespace ovdet {

// Dense H x W x C image, values in [0, 1], row-major HWC.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), data(static_cast<size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  bool empty() const { return data.empty(); }
};

// Axis-aligned crop with clamping to the image bounds.
inline Image crop_image(const Image& img, double x1, double y1, double x2, double y2) {
  int ix1 = std::clamp(static_cast<int>(std::floor(x1)), 0, img.width - 1);
  int iy1 = std::clamp(static_cast<int>(std::floor(y1)), 0, img.height - 1);
  int ix2 = std::clamp(static_cast<int>(std::ceil(x2)), ix1 + 1, img.width);
  int iy2 = std::clamp(static_cast<int>(std::ceil(y2)), iy1 + 1, img.height);
  Image out(iy2 - iy1, ix2 - ix1, img.channels);
  for (int y = iy1; y < iy2; ++y)
    for (int x = ix1; x < ix2; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y - iy1, x - ix1, c) = img.at(y, x, c);
  return out;
}

inline Image resize_bilinear(const Image& img, int out_h, int out_w) {
  Image out(out_h, out_w, img.channels);
  if (img.height == 0 || img.width == 0) return out;
  const double sy = out_h > 1 ? static_cast<double>(img.height - 1) / (out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(img.width - 1) / (out_w - 1) : 0.0;
  for (int oy = 0; oy < out_h; ++oy) {
    double fy = oy * sy;
    int y0 = static_cast<int>(std::floor(fy));
    int y1 = std::min(y0 + 1, img.height - 1);
    double wy = fy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      double fx = ox * sx;
      int x0 = static_cast<int>(std::floor(fx));
      int x1 = std::min(x0 + 1, img.width - 1);
      double wx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        double top = img.at(y0, x0, c) * (1 - wx) + img.at(y0, x1, c) * wx;
        double bot = img.at(y1, x0, c) * (1 - wx) + img.at(y1, x1, c) * wx;
        out.at(oy, ox, c) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// NPY I/O (format version 1.0, dtype <f8 or <f4, shape (H,W,C) or (H,W))
// ---------------------------------------------------------------------------

inline void save_npy(const std::string& path, const Image& img) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(img.height) + ", " + std::to_string(img.width) + ", " +
                       std::to_string(img.channels) + "), }";
  size_t total = 10 + header.size() + 1;
  size_t pad = (64 - total % 64) % 64;
  header += std::string(pad, ' ');
  header += '\n';
  uint16_t hlen = static_cast<uint16_t>(header.size());
  out.write("\x93NUMPY\x01\x00", 8);
  out.write(reinterpret_cast<const char*>(&hlen), 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size() * sizeof(double)));
}

inline Image load_npy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, "\x93NUMPY", 6) != 0)
    throw std::runtime_error("not an npy file: " + path);
  uint16_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 2);
  std::string header(hlen, '\0');
  in.read(header.data(), hlen);

  auto find_value = [&](const std::string& key) -> std::string {
    size_t p = header.find(key);
    if (p == std::string::npos) throw std::runtime_error("bad npy header: " + path);
    p = header.find(':', p) + 1;
    size_t e = p;
    int depth = 0;
    while (e < header.size() && (depth > 0 || (header[e] != ',' && header[e] != '}'))) {
      if (header[e] == '(') ++depth;
      if (header[e] == ')') --depth;
      ++e;
    }
    return header.substr(p, e - p);
  };

  std::string descr = find_value("'descr'");
  bool f8 = descr.find("<f8") != std::string::npos;
  bool f4 = descr.find("<f4") != std::string::npos;
  if (!f8 && !f4) throw std::runtime_error("unsupported npy dtype " + descr + " in " + path);
  if (find_value("'fortran_order'").find("True") != std::string::npos)
    throw std::runtime_error("fortran-order npy not supported: " + path);

  std::string shape = find_value("'shape'");
  std::vector<int> dims;
  for (size_t p = 0; p < shape.size();) {
    if (std::isdigit(static_cast<unsigned char>(shape[p]))) {
      size_t e = p;
      while (e < shape.size() && std::isdigit(static_cast<unsigned char>(shape[e]))) ++e;
      dims.push_back(std::stoi(shape.substr(p, e - p)));
      p = e;
    } else {
      ++p;
    }
  }
  if (dims.size() != 2 && dims.size() != 3)
    throw std::runtime_error("npy shape must be (H,W) or (H,W,C): " + path);

  Image img(dims[0], dims[1], dims.size() == 3 ? dims[2] : 1);
  size_t n = img.data.size();
  if (f8) {
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    std::vector<float> tmp(n);
    in.read(reinterpret_cast<char*>(tmp.data()), static_cast<std::streamsize>(n * sizeof(float)));
    for (size_t i = 0; i < n; ++i) img.data[i] = tmp[i];
  }
  if (!in) throw std::runtime_error("truncated npy file: " + path);
  return img;
}

// ---------------------------------------------------------------------------
// PNG I/O (8-bit, gray or RGB/RGBA)
// ---------------------------------------------------------------------------

inline void save_png(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw std::runtime_error("png writer supports 1 or 3 channels");
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot write file: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("png write failed: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<size_t>(img.width) * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double v = std::clamp(img.at(y, x, c), 0.0, 1.0);
        row[static_cast<size_t>(x) * img.channels + c] =
            static_cast<png_byte>(std::lround(v * 255.0));
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

inline Image load_png(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open file: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("png read failed: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  int w = static_cast<int>(png_get_image_width(png, info));
  int h = static_cast<int>(png_get_image_height(png, info));
  int c = static_cast<int>(png_get_channels(png, info));
  Image img(h, w, c);
  std::vector<png_byte> row(static_cast<size_t>(w) * c);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch)
        img.at(y, x, ch) = row[static_cast<size_t>(x) * c + ch] / 255.0;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

inline Image load_image(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".npy") return load_npy(path);
  if (ext == ".png") return load_png(path);
  throw std::runtime_error("unsupported image format (want .npy or .png): " + path);
}

}  // namespace ovdet
