#include "edgefit/dota.hpp"

#include "edgefit/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace edgefit {

namespace {

// Shoelace sum; positive for clockwise vertex order in image coordinates
// (y pointing down).
double signed_area_sum(const CornerQuad& q) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        const auto [x0, y0] = q.corner(i);
        const auto [x1, y1] = q.corner((i + 1) % 4);
        s += x0 * y1 - x1 * y0;
    }
    return s;
}

double parse_coord(const std::string& tok, std::size_t line_no, const std::string& origin) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw FormatError(origin + ":" + std::to_string(line_no) + ": non-numeric coordinate \"" +
                          tok + "\"");
    }
    if (pos != tok.size() || !std::isfinite(v)) {
        throw FormatError(origin + ":" + std::to_string(line_no) + ": non-numeric coordinate \"" +
                          tok + "\"");
    }
    return v;
}

}  // namespace

std::vector<DotaAnnotation> parse_dota_text(const std::string& text, const std::string& origin) {
    std::vector<DotaAnnotation> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens[0].rfind("imagesource", 0) == 0 || tokens[0].rfind("gsd", 0) == 0) continue;
        if (tokens.size() != 10) {
            throw FormatError(origin + ":" + std::to_string(line_no) + ": expected 10 tokens, got " +
                              std::to_string(tokens.size()));
        }
        DotaAnnotation ann;
        for (int i = 0; i < 4; ++i) {
            ann.quad.set_corner(i, parse_coord(tokens[2 * i], line_no, origin),
                                parse_coord(tokens[2 * i + 1], line_no, origin));
        }
        ann.label = tokens[8];
        std::size_t pos = 0;
        int difficulty = 0;
        try {
            difficulty = std::stoi(tokens[9], &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != tokens[9].size() || (difficulty != 0 && difficulty != 1)) {
            throw FormatError(origin + ":" + std::to_string(line_no) + ": bad difficulty \"" +
                              tokens[9] + "\" (expected 0 or 1)");
        }
        ann.difficulty = difficulty;
        if (signed_area_sum(ann.quad) < 0.0) {
            // Counter-clockwise: reverse the cycle, keeping the first vertex.
            const CornerQuad q = ann.quad;
            ann.quad.set_corner(1, q.corner(3)[0], q.corner(3)[1]);
            ann.quad.set_corner(3, q.corner(1)[0], q.corner(1)[1]);
        }
        out.push_back(std::move(ann));
    }
    return out;
}

std::vector<DotaAnnotation> parse_dota(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dota_text(buf.str(), path);
}

ConversionResult convert_le90(const std::vector<DotaAnnotation>& annotations) {
    ConversionResult result;
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        try {
            result.records.push_back(
                {from_corners(annotations[i].quad), annotations[i].label, annotations[i].difficulty});
        } catch (const GeometryError& e) {
            result.skipped.push_back({i, e.what()});
        }
    }
    return result;
}

CropPlan plan_crops(int width, int height, int window, int overlap) {
    if (width < 1 || height < 1) throw DimensionError("image dims must be >= 1");
    if (window < 1 || overlap < 0 || overlap >= window) {
        throw ArgumentError("crop plan needs window >= 1 and 0 <= overlap < window");
    }
    const int stride = window - overlap;
    auto axis_origins = [&](int extent) {
        std::vector<int> xs;
        for (int x = 0;; x += stride) {
            if (x + window >= extent) {
                xs.push_back(std::max(0, extent - window));
                break;
            }
            xs.push_back(x);
        }
        return xs;
    };
    CropPlan plan;
    plan.window = window;
    plan.overlap = overlap;
    for (const int y : axis_origins(height)) {
        for (const int x : axis_origins(width)) {
            plan.origins.emplace_back(x, y);
        }
    }
    return plan;
}

}  // namespace edgefit
