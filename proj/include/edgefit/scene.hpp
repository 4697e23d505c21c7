#pragma once

#include "edgefit/geometry.hpp"
#include "edgefit/image.hpp"

#include <vector>

namespace edgefit {

enum class ShapeKind { Rectangle, Ellipse };

struct SceneObject {
    ShapeKind shape = ShapeKind::Rectangle;
    OrientedBox box;
    double intensity = 200.0;  // [0, 255], must differ from background by >= 20
};

/// Description of a synthetic grayscale scene. Objects must fit inside
/// the canvas with at least a 2 px margin.
struct SceneSpec {
    int width = 128;
    int height = 128;
    std::vector<SceneObject> objects;
    double background = 30.0;
    double noise_sigma = 0.0;  // additive Gaussian noise, intensity units
    bool box_blur = false;     // 3x3 box blur before noise
    /// <= 1 (default) computes exact analytic pixel coverage; > 1 switches
    /// to supersample^2 midpoint samples per pixel (useful as an
    /// independent cross-check of the analytic path).
    int supersample = 0;
};

struct RenderedScene {
    GrayImage image;
    std::vector<OrientedBox> boxes;
};

/// Renders the scene with anti-aliased shape coverage (exact pixel/shape
/// intersection areas by default), an optional 3x3 box blur, and seeded
/// additive Gaussian noise clamped to [0, 255]. Identical spec + seed
/// give byte-identical images.
RenderedScene render_scene(const SceneSpec& spec, unsigned seed);

}  // namespace edgefit
