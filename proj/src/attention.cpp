#include "edgefit/attention.hpp"

#include "edgefit/error.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>

namespace edgefit {

namespace {

void check_level_dims(const FeaturePyramid& fp, const EdgePyramid& ep) {
    if (fp.levels.size() != ep.levels.size()) {
        throw DimensionError("feature and edge pyramids have different level counts");
    }
    for (std::size_t i = 0; i < fp.levels.size(); ++i) {
        if (fp.levels[i].width != ep.levels[i].width ||
            fp.levels[i].height != ep.levels[i].height) {
            throw DimensionError("feature/edge level " + std::to_string(i + 1) +
                                 " spatial dims differ");
        }
    }
}

std::uint32_t read_u32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

FusionWeights FusionWeights::averaging(int channels, int n_levels) {
    FusionWeights w;
    for (int l = 0; l < n_levels; ++l) {
        LevelFusion f;
        f.out_channels = channels;
        f.matrix.assign(std::size_t(channels) * 2 * channels, 0.0);
        f.bias.assign(channels, 0.0);
        for (int c = 0; c < channels; ++c) {
            f.matrix[std::size_t(c) * 2 * channels + c] = 0.5;
            f.matrix[std::size_t(c) * 2 * channels + channels + c] = 0.5;
        }
        w.levels.push_back(std::move(f));
    }
    return w;
}

FusionWeights FusionWeights::passthrough_original(int channels, int n_levels) {
    FusionWeights w;
    for (int l = 0; l < n_levels; ++l) {
        LevelFusion f;
        f.out_channels = channels;
        f.matrix.assign(std::size_t(channels) * 2 * channels, 0.0);
        f.bias.assign(channels, 0.0);
        for (int c = 0; c < channels; ++c) {
            f.matrix[std::size_t(c) * 2 * channels + channels + c] = 1.0;
        }
        w.levels.push_back(std::move(f));
    }
    return w;
}

FeaturePyramid apply_edge_attention(const FeaturePyramid& fp, const EdgePyramid& ep) {
    check_level_dims(fp, ep);
    FeaturePyramid out;
    out.levels.reserve(fp.levels.size());
    for (std::size_t l = 0; l < fp.levels.size(); ++l) {
        const FeatureMap& f = fp.levels[l];
        const GrayImage& e = ep.levels[l];
        FeatureMap y(f.channels, f.width, f.height);
        for (int c = 0; c < f.channels; ++c) {
            for (int py = 0; py < f.height; ++py) {
                for (int px = 0; px < f.width; ++px) {
                    y.at(c, px, py) = e.at(px, py) * f.at(c, px, py);
                }
            }
        }
        out.levels.push_back(std::move(y));
    }
    return out;
}

FeaturePyramid fuse_features(const FeaturePyramid& original, const FeaturePyramid& attended,
                             const FusionWeights& weights) {
    if (original.levels.size() != attended.levels.size() ||
        original.levels.size() != weights.levels.size()) {
        throw DimensionError("fusion inputs have different level counts");
    }
    FeaturePyramid out;
    out.levels.reserve(original.levels.size());
    for (std::size_t l = 0; l < original.levels.size(); ++l) {
        const FeatureMap& o = original.levels[l];
        const FeatureMap& a = attended.levels[l];
        const LevelFusion& f = weights.levels[l];
        if (o.channels != a.channels || o.width != a.width || o.height != a.height) {
            throw DimensionError("fusion level " + std::to_string(l + 1) + " dims differ");
        }
        const int C = o.channels;
        if (f.out_channels != C || f.matrix.size() != std::size_t(C) * 2 * C ||
            f.bias.size() != std::size_t(C)) {
            throw DimensionError("fusion weights do not match channel count at level " +
                                 std::to_string(l + 1));
        }
        FeatureMap y(C, o.width, o.height);
        for (int py = 0; py < o.height; ++py) {
            for (int px = 0; px < o.width; ++px) {
                for (int co = 0; co < C; ++co) {
                    double acc = f.bias[co];
                    const double* row = f.matrix.data() + std::size_t(co) * 2 * C;
                    for (int ci = 0; ci < C; ++ci) {
                        acc += row[ci] * a.at(ci, px, py) + row[C + ci] * o.at(ci, px, py);
                    }
                    y.at(co, px, py) = acc;
                }
            }
        }
        out.levels.push_back(std::move(y));
    }
    return out;
}

std::vector<AttentionLevelStats> attention_report(const FeaturePyramid& fp, const EdgePyramid& ep) {
    check_level_dims(fp, ep);
    std::vector<AttentionLevelStats> stats;
    stats.reserve(fp.levels.size());
    for (std::size_t l = 0; l < fp.levels.size(); ++l) {
        const FeatureMap& f = fp.levels[l];
        const GrayImage& e = ep.levels[l];
        double edge_sum = 0.0, non_edge_sum = 0.0;
        std::size_t edge_n = 0, non_edge_n = 0;
        for (int py = 0; py < f.height; ++py) {
            for (int px = 0; px < f.width; ++px) {
                const double ev = e.at(px, py);
                double mag = 0.0;
                for (int c = 0; c < f.channels; ++c) mag += std::abs(ev * f.at(c, px, py));
                if (ev > 0.5) {
                    edge_sum += mag;
                    edge_n += std::size_t(f.channels);
                } else {
                    non_edge_sum += mag;
                    non_edge_n += std::size_t(f.channels);
                }
            }
        }
        AttentionLevelStats s;
        s.edge_mean = edge_n > 0 ? edge_sum / double(edge_n) : 0.0;
        s.non_edge_mean = non_edge_n > 0 ? non_edge_sum / double(non_edge_n) : 0.0;
        if (edge_n == 0 || non_edge_n == 0 || s.non_edge_mean == 0.0) {
            s.degenerate = true;
            s.ratio = 0.0;
        } else {
            s.ratio = s.edge_mean / s.non_edge_mean;
        }
        stats.push_back(s);
    }
    return stats;
}

FeatureMap load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tensor file: " + path);
    const std::uint32_t c = read_u32_le(in);
    const std::uint32_t w = read_u32_le(in);
    const std::uint32_t h = read_u32_le(in);
    if (!in) throw IoError("truncated tensor header: " + path);
    if (c < 1 || w < 1 || h < 1 || double(c) * w * h > 1e9) {
        throw FormatError("implausible tensor dims in " + path);
    }
    FeatureMap fm{int(c), int(w), int(h)};
    std::vector<float> buf(fm.data.size());
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
    if (std::size_t(in.gcount()) != buf.size() * sizeof(float)) {
        throw IoError("truncated tensor payload: " + path);
    }
    for (std::size_t i = 0; i < buf.size(); ++i) fm.data[i] = double(buf[i]);
    return fm;
}

void write_tensor(const FeatureMap& fm, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open tensor file for writing: " + path);
    write_u32_le(out, std::uint32_t(fm.channels));
    write_u32_le(out, std::uint32_t(fm.width));
    write_u32_le(out, std::uint32_t(fm.height));
    std::vector<float> buf(fm.data.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = float(fm.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              std::streamsize(buf.size() * sizeof(float)));
    if (!out) throw IoError("short tensor write: " + path);
}

FeaturePyramid synthetic_feature_pyramid(int channels, int w1, int h1, int n_levels,
                                         unsigned seed) {
    if (channels < 1 || w1 < 1 || h1 < 1 || n_levels < 1) {
        throw DimensionError("synthetic pyramid dims must be >= 1");
    }
    std::mt19937 rng(seed);
    FeaturePyramid fp;
    int w = w1, h = h1;
    for (int l = 0; l < n_levels; ++l) {
        FeatureMap fm(channels, w, h);
        for (double& v : fm.data) v = double(rng()) / 4294967296.0;
        fp.levels.push_back(std::move(fm));
        w = (w + 1) / 2;
        h = (h + 1) / 2;
    }
    return fp;
}

}  // namespace edgefit
