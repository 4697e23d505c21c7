#pragma once

#include <array>
#include <utility>

namespace edgefit {

/// Rotated rectangle in long-edge form: w is the long edge, h the short
/// edge, theta the angle of the long edge against the image x-axis folded
/// into [-pi/2, pi/2). Image coordinates, y pointing down.
struct OrientedBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    double theta = 0.0;

    /// Unit vector along the long edge.
    std::array<double, 2> axis_long() const;
    /// Unit vector along the short edge (long axis rotated by +90 deg).
    std::array<double, 2> axis_short() const;
    bool valid() const;
};

/// Four vertices (x1,y1,...,x4,y4) in pixels.
struct CornerQuad {
    std::array<double, 8> xy{};

    std::array<double, 2> corner(int i) const { return {xy[2 * i], xy[2 * i + 1]}; }
    void set_corner(int i, double x, double y) {
        xy[2 * i] = x;
        xy[2 * i + 1] = y;
    }
};

/// Smooth inside/outside weight of a point against a box, together with
/// its partial derivatives with respect to (cx, cy, w, h, theta).
struct SoftContainment {
    double value = 0.0;
    std::array<double, 5> d_params{};
};

struct ContainmentConfig {
    double slope = 10.0;
    /// Compare axis distances against the full extents (w, h) instead of
    /// the half extents (w/2, h/2). With half extents the 0.5 crossing of
    /// each factor sits exactly on the box boundary; the full-extent
    /// variant saturates near 1 over a band twice the box size.
    bool full_extent = false;
};

/// Folds an angle into [-period/2, period/2).
double fold_angle(double theta, double period);

/// Recovers the long-edge box from a (possibly noisy) rectangle given as
/// four corners: w/h are the means of the two opposite edge pairs, theta
/// is the long-pair direction folded into [-pi/2, pi/2), the center is
/// the vertex centroid. Square inputs (equal edge pairs) fold theta into
/// [-pi/4, pi/4). Throws GeometryError when an edge is shorter than
/// 1e-6 px or opposite edges differ by more than 1% in length.
OrientedBox from_corners(const CornerQuad& quad);

/// Four vertices in clockwise order (image coordinates, y down), starting
/// from the box-local (-w/2, -h/2) corner.
CornerQuad to_corners(const OrientedBox& box);

/// Box-local coordinates of a point: u along the long edge, v along the
/// short edge. |u| is the distance to the box's short axis, |v| the
/// distance to the long axis.
std::pair<double, double> local_coords(const OrientedBox& box, double px, double py);

/// Product of two boundary sigmoids, one per axis: near 1 deep inside the
/// box, near 0 far outside, exactly 0.5 when the point sits on an edge
/// midline. Partials are computed analytically through the local frame.
SoftContainment soft_containment(const OrientedBox& box, double px, double py,
                                 const ContainmentConfig& cfg = {});

}  // namespace edgefit
