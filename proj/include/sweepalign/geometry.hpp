#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sweepalign {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

Quat yaw_quaternion(double yaw);

// SE(3) pose. Quaternion convention: (w, x, y, z), Hamilton product, active
// rotation, so apply(p) = R(q) * p + t. The quaternion is stored normalized.
class RigidTransform {
public:
    RigidTransform();
    // Throws InvalidArgument unless |q| = 1 within 1e-9 and t is finite.
    RigidTransform(const Quat& rotation, const Vec3& translation);

    static RigidTransform identity() { return {}; }
    static RigidTransform from_yaw(double yaw, const Vec3& translation = Vec3::Zero());
    static RigidTransform from_translation(const Vec3& translation);
    // R must be a proper rotation (orthonormal, det +1) within 1e-6.
    static RigidTransform from_matrix(const Mat3& rotation, const Vec3& translation);

    const Quat& rotation() const { return rotation_; }
    const Mat3& rotation_matrix() const { return matrix_; }
    const Vec3& translation() const { return translation_; }
    // Heading of the rotated x axis in the xy-plane.
    double yaw() const;

    // Throws InvalidArgument on non-finite p.
    Vec3 apply(const Vec3& p) const;
    // Unchecked variant for hot loops over already validated points.
    Vec3 operator*(const Vec3& p) const { return matrix_ * p + translation_; }

    // (a * b).apply(p) == a.apply(b.apply(p))
    RigidTransform operator*(const RigidTransform& other) const;
    RigidTransform inverse() const;

    bool is_identity(double tol = 1e-12) const;

private:
    Quat rotation_;
    Mat3 matrix_;
    Vec3 translation_;
};

Vec3 transform_point(const RigidTransform& transform, const Vec3& p);
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& transform);

// Translation is interpolated linearly, rotation by shortest-arc slerp.
// alpha must lie in [0, 1].
RigidTransform interpolate_pose(const RigidTransform& a, const RigidTransform& b, double alpha);

// ||Rot(qa) - Rot(qb)||_F, in [0, 2*sqrt(2)]. Both inputs must be unit
// quaternions within 1e-9.
double rotation_frobenius_distance(const Quat& qa, const Quat& qb);

// Translation followed by a unit quaternion: (tx, ty, tz, qw, qx, qy, qz).
struct SevenVector {
    Vec3 t = Vec3::Zero();
    Quat q = Quat::Identity();

    static SevenVector from_transform(const RigidTransform& transform);
    static SevenVector from_array(const std::array<double, 7>& values);
    RigidTransform to_transform() const;
    std::array<double, 7> to_array() const;
};

// nuScenes detection taxonomy.
enum class ObjectClass {
    Car,
    Truck,
    ConstructionVehicle,
    Bus,
    Trailer,
    Barrier,
    Motorcycle,
    Bicycle,
    Pedestrian,
    TrafficCone,
};

inline constexpr std::array<ObjectClass, 10> kAllClasses = {
    ObjectClass::Car,     ObjectClass::Truck,      ObjectClass::ConstructionVehicle,
    ObjectClass::Bus,     ObjectClass::Trailer,    ObjectClass::Barrier,
    ObjectClass::Motorcycle, ObjectClass::Bicycle, ObjectClass::Pedestrian,
    ObjectClass::TrafficCone,
};

std::string_view class_name(ObjectClass cls);
// Throws InvalidArgument for unknown names.
ObjectClass class_from_name(std::string_view name);

// Yaw-only oriented cuboid. Size is (length, width, height); length runs
// along the heading.
struct Box3D {
    Vec3 center = Vec3::Zero();
    Vec3 size = Vec3::Ones();
    double yaw = 0.0;
    ObjectClass cls = ObjectClass::Car;
    std::optional<int> object_id;
    std::optional<double> score;

    // Throws InvalidArgument on non-positive or non-finite sizes, a
    // non-finite center/yaw, or a score outside [0, 1].
    void validate() const;
    // Returns a copy with yaw wrapped into (-pi, pi].
    Box3D normalized() const;
    // Footprint corners, counter-clockwise.
    std::array<Vec2, 4> bev_corners() const;
    double volume() const { return size.x() * size.y() * size.z(); }
    // Pose of the box body frame (origin at the center, x along heading).
    RigidTransform pose() const;
};

double polygon_area(std::span<const Vec2> polygon);
// Sutherland-Hodgman clipping of `subject` against the convex,
// counter-clockwise `clip` polygon.
std::vector<Vec2> clip_convex_polygon(std::span<const Vec2> subject, std::span<const Vec2> clip);

double bev_intersection_area(const Box3D& a, const Box3D& b);
double bev_iou(const Box3D& a, const Box3D& b);
// BEV intersection area times vertical overlap, over the union of volumes.
double iou_3d(const Box3D& a, const Box3D& b);

// Boundary inclusive (a 1e-9 m slack absorbs rounding on faces).
bool box_contains(const Box3D& box, const Vec3& p);
std::vector<bool> points_in_box(const Box3D& box, std::span<const Vec3> points);

}  // namespace sweepalign
