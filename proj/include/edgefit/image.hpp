#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace edgefit {

/// Row-major grayscale raster. Pixel values are kept as doubles so that
/// downstream arithmetic does not quantize; freshly loaded images hold
/// exact byte values in [0, 255].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0);

    double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    std::size_t pixel_count() const { return data.size(); }
};

/// Per-pixel 2-D gradient rasters, same layout as GrayImage.
struct VectorField {
    int width = 0;
    int height = 0;
    std::vector<double> gx;
    std::vector<double> gy;

    VectorField() = default;
    VectorField(int w, int h);

    double gx_at(int x, int y) const { return gx[std::size_t(y) * width + x]; }
    double gy_at(int x, int y) const { return gy[std::size_t(y) * width + x]; }
    double magnitude_at(int x, int y) const;
};

/// Channel-major multi-channel raster: data[(c * height + y) * width + x].
struct FeatureMap {
    int channels = 0;
    int width = 0;
    int height = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int c, int w, int h, double fill = 0.0);

    double at(int c, int x, int y) const {
        return data[(std::size_t(c) * height + y) * width + x];
    }
    double& at(int c, int x, int y) {
        return data[(std::size_t(c) * height + y) * width + x];
    }
};

/// Loads a binary 8-bit PGM (P5, maxval 255). Bytes are copied verbatim,
/// no scaling. ASCII (P2) and other maxvals are rejected.
GrayImage load_pgm(const std::string& path);

/// Writes a binary PGM with the canonical "P5\n<w> <h>\n255\n" header.
/// Values are clamped to [0, 255] and rounded to the nearest byte.
void write_pgm(const GrayImage& img, const std::string& path);

/// 3x3 Sobel derivatives with replicate (clamp) border handling.
/// Output dimensions equal the input's. Requires at least a 3x3 image.
VectorField sobel_gradients(const GrayImage& img);

/// Stride-2 2x2 max pooling. Partial blocks at the right/bottom edge are
/// clipped, so output dims are ceil(w/2) x ceil(h/2). Requires w, h >= 2.
GrayImage max_pool_2x2(const GrayImage& img);

/// Bilinear interpolation of both gradient components using the
/// center-of-pixel convention (pixel (i, j) sits at coordinates (i, j)).
/// Coordinates outside [0, w-1] x [0, h-1] yield (0, 0); never throws.
std::pair<double, double> bilinear_sample(const VectorField& field, double x, double y);

}  // namespace edgefit
