#pragma once

#include "edgefit/edges.hpp"
#include "edgefit/image.hpp"

#include <string>
#include <vector>

namespace edgefit {

/// Stack of feature maps whose spatial dims halve (ceil) per level and
/// that share one channel count.
struct FeaturePyramid {
    std::vector<FeatureMap> levels;
};

/// Per-level linear map from concat(attended, original) back to the
/// original channel count, applied per pixel.
struct LevelFusion {
    int out_channels = 0;
    std::vector<double> matrix;  // out_channels x (2 * out_channels), row-major
    std::vector<double> bias;    // out_channels
};

struct FusionWeights {
    std::vector<LevelFusion> levels;

    /// [0.5 I | 0.5 I] with zero bias on every level.
    static FusionWeights averaging(int channels, int n_levels);
    /// [0 | I] with zero bias: output equals the original features.
    static FusionWeights passthrough_original(int channels, int n_levels);
};

/// Masks every feature channel by the matching edge level:
/// out[c, x, y] = edge[x, y] * feature[c, x, y]. Level counts and spatial
/// dims must agree.
FeaturePyramid apply_edge_attention(const FeaturePyramid& fp, const EdgePyramid& ep);

/// Per-pixel linear fusion of the attended features with the originals:
/// out channels = matrix * concat(attended, original) + bias.
FeaturePyramid fuse_features(const FeaturePyramid& original, const FeaturePyramid& attended,
                             const FusionWeights& weights);

/// Mean attended magnitude inside vs outside the edge mask per level.
struct AttentionLevelStats {
    double edge_mean = 0.0;      // mean |out| where edge > 0.5
    double non_edge_mean = 0.0;  // mean |out| where edge <= 0.5
    double ratio = 0.0;          // edge_mean / non_edge_mean, 0 when degenerate
    bool degenerate = false;     // one region empty or zero denominator
};

std::vector<AttentionLevelStats> attention_report(const FeaturePyramid& fp, const EdgePyramid& ep);

/// Raw tensor file: little-endian u32 channels, width, height followed by
/// channel-major 32-bit floats.
FeatureMap load_tensor(const std::string& path);
void write_tensor(const FeatureMap& fm, const std::string& path);

/// Deterministic pyramid of uniform [0, 1) features, level 1 at (w1, h1)
/// and ceil-halved dims per further level.
FeaturePyramid synthetic_feature_pyramid(int channels, int w1, int h1, int n_levels,
                                         unsigned seed);

}  // namespace edgefit
