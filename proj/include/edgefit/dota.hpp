#pragma once

#include "edgefit/geometry.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace edgefit {

/// One annotation line: four corner points, a class label and a
/// difficulty flag. Corners are stored in clockwise order (image
/// coordinates, y down); counter-clockwise input is re-ordered on parse.
struct DotaAnnotation {
    CornerQuad quad;
    std::string label;
    int difficulty = 0;
};

/// Parses a DOTA-style annotation file: lines of
/// "x1 y1 x2 y2 x3 y3 x4 y4 label difficulty", with header lines starting
/// with "imagesource" or "gsd" (and blank lines) skipped. Parse failures
/// report the offending line number.
std::vector<DotaAnnotation> parse_dota(const std::string& path);

/// Same parser over in-memory text.
std::vector<DotaAnnotation> parse_dota_text(const std::string& text,
                                            const std::string& origin = "<text>");

struct ConvertedBox {
    OrientedBox box;
    std::string label;
    int difficulty = 0;
};

/// Per-annotation failure record: input index and reason.
struct ConversionSkip {
    std::size_t index = 0;
    std::string reason;
};

struct ConversionResult {
    std::vector<ConvertedBox> records;
    std::vector<ConversionSkip> skipped;
};

/// Converts corner annotations to long-edge boxes. Invalid quads are
/// reported in `skipped` rather than aborting the batch.
ConversionResult convert_le90(const std::vector<DotaAnnotation>& annotations);

/// Sliding-window tiling plan: fixed 1024 px windows advancing by
/// window - overlap = 512 px, with the last row/column shifted inward so
/// windows stay inside the image. Images smaller than the window get one
/// clamped window at the origin.
struct CropPlan {
    int window = 1024;
    int overlap = 512;
    std::vector<std::pair<int, int>> origins;  // (x0, y0)
};

CropPlan plan_crops(int width, int height, int window = 1024, int overlap = 512);

}  // namespace edgefit
