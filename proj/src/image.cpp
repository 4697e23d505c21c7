#include "edgefit/image.hpp"

#include "edgefit/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>

namespace edgefit {

GrayImage::GrayImage(int w, int h, double fill) {
    if (w < 1 || h < 1) throw DimensionError("GrayImage dimensions must be >= 1");
    width = w;
    height = h;
    data.assign(std::size_t(w) * h, fill);
}

VectorField::VectorField(int w, int h) {
    if (w < 1 || h < 1) throw DimensionError("VectorField dimensions must be >= 1");
    width = w;
    height = h;
    gx.assign(std::size_t(w) * h, 0.0);
    gy.assign(std::size_t(w) * h, 0.0);
}

double VectorField::magnitude_at(int x, int y) const {
    const double a = gx_at(x, y), b = gy_at(x, y);
    return std::sqrt(a * a + b * b);
}

FeatureMap::FeatureMap(int c, int w, int h, double fill) {
    if (c < 1 || w < 1 || h < 1) throw DimensionError("FeatureMap dimensions must be >= 1");
    channels = c;
    width = w;
    height = h;
    data.assign(std::size_t(c) * w * h, fill);
}

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) continue;
        tok.push_back(char(c));
        while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
            tok.push_back(char(in.get()));
        }
        return tok;
    }
    return tok;
}

long parse_header_int(const std::string& tok, const char* what, const std::string& path) {
    if (tok.empty()) throw FormatError(std::string("missing ") + what + " in PGM header: " + path);
    std::size_t pos = 0;
    long value = 0;
    try {
        value = std::stol(tok, &pos);
    } catch (const std::exception&) {
        throw FormatError(std::string("bad ") + what + " \"" + tok + "\" in PGM header: " + path);
    }
    if (pos != tok.size() || value < 0) {
        throw FormatError(std::string("bad ") + what + " \"" + tok + "\" in PGM header: " + path);
    }
    return value;
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);

    const std::string magic = next_pgm_token(in);
    if (magic != "P5") {
        throw FormatError("unsupported magic \"" + magic + "\" (binary P5 required): " + path);
    }
    const long w = parse_header_int(next_pgm_token(in), "width", path);
    const long h = parse_header_int(next_pgm_token(in), "height", path);
    const long maxval = parse_header_int(next_pgm_token(in), "maxval", path);
    if (w < 1 || h < 1) throw FormatError("non-positive dimensions in PGM header: " + path);
    if (maxval != 255) {
        throw UnsupportedError("only 8-bit PGM (maxval 255) is supported, got maxval " +
                               std::to_string(maxval) + ": " + path);
    }
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep)) {
        throw FormatError("missing whitespace after maxval: " + path);
    }

    GrayImage img{int(w), int(h)};
    std::vector<unsigned char> buf(img.pixel_count());
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (std::size_t(in.gcount()) != buf.size()) {
        throw IoError("truncated pixel data: " + path);
    }
    std::copy(buf.begin(), buf.end(), img.data.begin());
    return img;
}

void write_pgm(const GrayImage& img, const std::string& path) {
    if (img.width < 1 || img.height < 1) throw DimensionError("cannot write an empty image");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<unsigned char> buf(img.pixel_count());
    for (std::size_t i = 0; i < buf.size(); ++i) {
        buf[i] = static_cast<unsigned char>(std::lround(std::clamp(img.data[i], 0.0, 255.0)));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    if (!out) throw IoError("short write: " + path);
}

VectorField sobel_gradients(const GrayImage& img) {
    if (img.width < 3 || img.height < 3) {
        throw DimensionError("sobel_gradients needs an image of at least 3x3");
    }
    const int w = img.width, h = img.height;
    VectorField out(w, h);
    auto px = [&](int x, int y) {
        return img.data[std::size_t(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double tl = px(x - 1, y - 1), tc = px(x, y - 1), tr = px(x + 1, y - 1);
            const double ml = px(x - 1, y), mr = px(x + 1, y);
            const double bl = px(x - 1, y + 1), bc = px(x, y + 1), br = px(x + 1, y + 1);
            const std::size_t i = std::size_t(y) * w + x;
            out.gx[i] = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            out.gy[i] = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
        }
    }
    return out;
}

GrayImage max_pool_2x2(const GrayImage& img) {
    if (img.width < 2 || img.height < 2) {
        throw DimensionError("max_pool_2x2 needs an image of at least 2x2");
    }
    const int ow = (img.width + 1) / 2;
    const int oh = (img.height + 1) / 2;
    GrayImage out(ow, oh);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const int x0 = 2 * ox, y0 = 2 * oy;
            double m = img.at(x0, y0);
            if (x0 + 1 < img.width) m = std::max(m, img.at(x0 + 1, y0));
            if (y0 + 1 < img.height) m = std::max(m, img.at(x0, y0 + 1));
            if (x0 + 1 < img.width && y0 + 1 < img.height) m = std::max(m, img.at(x0 + 1, y0 + 1));
            out.at(ox, oy) = m;
        }
    }
    return out;
}

std::pair<double, double> bilinear_sample(const VectorField& field, double x, double y) {
    if (!(x >= 0.0) || !(y >= 0.0) || !(x <= field.width - 1.0) || !(y <= field.height - 1.0)) {
        return {0.0, 0.0};
    }
    const int x0 = std::min(int(x), field.width - 1);
    const int y0 = std::min(int(y), field.height - 1);
    const int x1 = std::min(x0 + 1, field.width - 1);
    const int y1 = std::min(y0 + 1, field.height - 1);
    const double fx = x - x0, fy = y - y0;
    const double w00 = (1 - fx) * (1 - fy);
    const double w10 = fx * (1 - fy);
    const double w01 = (1 - fx) * fy;
    const double w11 = fx * fy;
    auto lerp = [&](const std::vector<double>& g) {
        return w00 * g[std::size_t(y0) * field.width + x0] +
               w10 * g[std::size_t(y0) * field.width + x1] +
               w01 * g[std::size_t(y1) * field.width + x0] +
               w11 * g[std::size_t(y1) * field.width + x1];
    };
    return {lerp(field.gx), lerp(field.gy)};
}

}  // namespace edgefit
