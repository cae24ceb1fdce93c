#include "sweepalign/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "sweepalign/errors.hpp"

namespace sweepalign {

namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kMinArea = 1e-12;
constexpr double kContainSlack = 1e-9;

void require_unit(const Quat& q, const char* what) {
    const double n = q.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitTolerance) {
        throw InvalidArgument(std::string(what) + ": quaternion is not unit (norm " +
                              std::to_string(n) + ")");
    }
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

double normalize_angle(double angle) {
    if (!std::isfinite(angle)) {
        throw InvalidArgument("normalize_angle: non-finite angle");
    }
    double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (wrapped <= -kPi) {
        wrapped += 2.0 * kPi;
    }
    return wrapped;
}

Quat yaw_quaternion(double yaw) {
    return Quat(std::cos(0.5 * yaw), 0.0, 0.0, std::sin(0.5 * yaw));
}

RigidTransform::RigidTransform()
    : rotation_(Quat::Identity()), matrix_(Mat3::Identity()), translation_(Vec3::Zero()) {}

RigidTransform::RigidTransform(const Quat& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
    require_unit(rotation, "RigidTransform");
    if (!translation.allFinite()) {
        throw InvalidArgument("RigidTransform: non-finite translation");
    }
    // Already-unit inputs (e.g. parsed from a file) are kept bit for bit.
    if (std::abs(rotation_.norm() - 1.0) > 1e-14) {
        rotation_.normalize();
    }
    matrix_ = rotation_.toRotationMatrix();
}

RigidTransform RigidTransform::from_yaw(double yaw, const Vec3& translation) {
    if (!std::isfinite(yaw)) {
        throw InvalidArgument("RigidTransform::from_yaw: non-finite yaw");
    }
    return {yaw_quaternion(yaw), translation};
}

RigidTransform RigidTransform::from_translation(const Vec3& translation) {
    return {Quat::Identity(), translation};
}

RigidTransform RigidTransform::from_matrix(const Mat3& rotation, const Vec3& translation) {
    if (!rotation.allFinite() ||
        (rotation.transpose() * rotation - Mat3::Identity()).norm() > 1e-6 ||
        rotation.determinant() < 0.0) {
        throw InvalidArgument("RigidTransform::from_matrix: not a proper rotation");
    }
    Quat q(rotation);
    q.normalize();
    if (q.w() < 0.0) {
        q.coeffs() *= -1.0;
    }
    return {q, translation};
}

double RigidTransform::yaw() const { return std::atan2(matrix_(1, 0), matrix_(0, 0)); }

Vec3 RigidTransform::apply(const Vec3& p) const {
    if (!p.allFinite()) {
        throw InvalidArgument("transform_point: non-finite point");
    }
    return matrix_ * p + translation_;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
    Quat q = rotation_ * other.rotation_;
    q.normalize();
    return {q, matrix_ * other.translation_ + translation_};
}

RigidTransform RigidTransform::inverse() const {
    const Quat q = rotation_.conjugate();
    return {q, -(matrix_.transpose() * translation_)};
}

bool RigidTransform::is_identity(double tol) const {
    return translation_.norm() <= tol && (matrix_ - Mat3::Identity()).norm() <= tol;
}

Vec3 transform_point(const RigidTransform& transform, const Vec3& p) { return transform.apply(p); }

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }

RigidTransform invert(const RigidTransform& transform) { return transform.inverse(); }

RigidTransform interpolate_pose(const RigidTransform& a, const RigidTransform& b, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidArgument("interpolate_pose: alpha must lie in [0, 1]");
    }
    if (alpha == 0.0) {
        return a;
    }
    if (alpha == 1.0) {
        return b;
    }
    // Eigen's slerp flips the sign of b when needed, so the arc is the short one.
    Quat q = a.rotation().slerp(alpha, b.rotation());
    q.normalize();
    const Vec3 t = (1.0 - alpha) * a.translation() + alpha * b.translation();
    return {q, t};
}

double rotation_frobenius_distance(const Quat& qa, const Quat& qb) {
    require_unit(qa, "rotation_frobenius_distance");
    require_unit(qb, "rotation_frobenius_distance");
    return (qa.normalized().toRotationMatrix() - qb.normalized().toRotationMatrix()).norm();
}

SevenVector SevenVector::from_transform(const RigidTransform& transform) {
    return {transform.translation(), transform.rotation()};
}

SevenVector SevenVector::from_array(const std::array<double, 7>& v) {
    SevenVector out{Vec3(v[0], v[1], v[2]), Quat(v[3], v[4], v[5], v[6])};
    require_unit(out.q, "SevenVector");
    return out;
}

RigidTransform SevenVector::to_transform() const { return {q, t}; }

std::array<double, 7> SevenVector::to_array() const {
    return {t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()};
}

std::string_view class_name(ObjectClass cls) {
    switch (cls) {
        case ObjectClass::Car: return "car";
        case ObjectClass::Truck: return "truck";
        case ObjectClass::ConstructionVehicle: return "construction_vehicle";
        case ObjectClass::Bus: return "bus";
        case ObjectClass::Trailer: return "trailer";
        case ObjectClass::Barrier: return "barrier";
        case ObjectClass::Motorcycle: return "motorcycle";
        case ObjectClass::Bicycle: return "bicycle";
        case ObjectClass::Pedestrian: return "pedestrian";
        case ObjectClass::TrafficCone: return "traffic_cone";
    }
    throw InvalidArgument("class_name: unknown class id");
}

ObjectClass class_from_name(std::string_view name) {
    for (const ObjectClass cls : kAllClasses) {
        if (class_name(cls) == name) {
            return cls;
        }
    }
    throw InvalidArgument("unknown class name '" + std::string(name) + "'");
}

void Box3D::validate() const {
    if (!center.allFinite() || !size.allFinite() || !std::isfinite(yaw)) {
        throw InvalidArgument("Box3D: non-finite field");
    }
    if ((size.array() <= 0.0).any()) {
        throw InvalidArgument("Box3D: size components must be strictly positive");
    }
    if (score && !(*score >= 0.0 && *score <= 1.0)) {
        throw InvalidArgument("Box3D: score outside [0, 1]");
    }
}

Box3D Box3D::normalized() const {
    Box3D out = *this;
    out.yaw = normalize_angle(yaw);
    return out;
}

std::array<Vec2, 4> Box3D::bev_corners() const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double hl = 0.5 * size.x();
    const double hw = 0.5 * size.y();
    const std::array<Vec2, 4> local = {Vec2(hl, hw), Vec2(-hl, hw), Vec2(-hl, -hw), Vec2(hl, -hw)};
    std::array<Vec2, 4> out;
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = Vec2(center.x() + c * local[i].x() - s * local[i].y(),
                      center.y() + s * local[i].x() + c * local[i].y());
    }
    return out;
}

RigidTransform Box3D::pose() const { return RigidTransform::from_yaw(yaw, center); }

double polygon_area(std::span<const Vec2> polygon) {
    if (polygon.size() < 3) {
        return 0.0;
    }
    double twice = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        twice += cross2(polygon[i], polygon[(i + 1) % polygon.size()]);
    }
    return 0.5 * std::abs(twice);
}

std::vector<Vec2> clip_convex_polygon(std::span<const Vec2> subject, std::span<const Vec2> clip) {
    std::vector<Vec2> output(subject.begin(), subject.end());
    for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
        const Vec2& a = clip[e];
        const Vec2& b = clip[(e + 1) % clip.size()];
        const Vec2 edge = b - a;
        const double tol = 1e-9 * edge.norm();
        const std::vector<Vec2> input = std::move(output);
        output.clear();

        auto side = [&](const Vec2& p) { return cross2(edge, p - a); };
        auto intersect = [&](const Vec2& s, const Vec2& t, double ds, double dt) {
            const double denom = ds - dt;
            const double u = denom != 0.0 ? std::clamp(ds / denom, 0.0, 1.0) : 0.0;
            return Vec2(s + u * (t - s));
        };

        for (std::size_t i = 0; i < input.size(); ++i) {
            const Vec2& s = input[(i + input.size() - 1) % input.size()];
            const Vec2& t = input[i];
            const double ds = side(s);
            const double dt = side(t);
            const bool s_in = ds >= -tol;
            const bool t_in = dt >= -tol;
            if (t_in) {
                if (!s_in) {
                    output.push_back(intersect(s, t, ds, dt));
                }
                output.push_back(t);
            } else if (s_in) {
                output.push_back(intersect(s, t, ds, dt));
            }
        }
    }
    return output;
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
    const auto ca = a.bev_corners();
    const auto cb = b.bev_corners();
    const double area = polygon_area(clip_convex_polygon(ca, cb));
    return area < kMinArea ? 0.0 : area;
}

double bev_iou(const Box3D& a, const Box3D& b) {
    a.validate();
    b.validate();
    const double area_a = a.size.x() * a.size.y();
    const double area_b = b.size.x() * b.size.y();
    if (area_a < kMinArea || area_b < kMinArea) {
        throw InvalidArgument("bev_iou: degenerate box");
    }
    const double inter = bev_intersection_area(a, b);
    const double iou = inter / (area_a + area_b - inter);
    return std::clamp(iou, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
    a.validate();
    b.validate();
    const double vol_a = a.volume();
    const double vol_b = b.volume();
    if (vol_a < kMinArea || vol_b < kMinArea) {
        throw InvalidArgument("iou_3d: degenerate box");
    }
    const double z_lo = std::max(a.center.z() - 0.5 * a.size.z(), b.center.z() - 0.5 * b.size.z());
    const double z_hi = std::min(a.center.z() + 0.5 * a.size.z(), b.center.z() + 0.5 * b.size.z());
    const double overlap_h = std::max(0.0, z_hi - z_lo);
    if (overlap_h <= 0.0) {
        return 0.0;
    }
    const double inter = bev_intersection_area(a, b) * overlap_h;
    return std::clamp(inter / (vol_a + vol_b - inter), 0.0, 1.0);
}

bool box_contains(const Box3D& box, const Vec3& p) {
    const Vec3 d = p - box.center;
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    const double local_x = c * d.x() + s * d.y();
    const double local_y = -s * d.x() + c * d.y();
    return std::abs(local_x) <= 0.5 * box.size.x() + kContainSlack &&
           std::abs(local_y) <= 0.5 * box.size.y() + kContainSlack &&
           std::abs(d.z()) <= 0.5 * box.size.z() + kContainSlack;
}

std::vector<bool> points_in_box(const Box3D& box, std::span<const Vec3> points) {
    box.validate();
    std::vector<bool> mask(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        mask[i] = box_contains(box, points[i]);
    }
    return mask;
}

}  // namespace sweepalign
