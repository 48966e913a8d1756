#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>

namespace climbsim {

using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Quat = Eigen::Quaterniond;

constexpr double kPi = 3.14159265358979323846;

inline Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d r;
  const double c = std::cos(a), s = std::sin(a);
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

inline Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d r;
  const double c = std::cos(a), s = std::sin(a);
  r << c, 0, s,
       0, 1, 0,
      -s, 0, c;
  return r;
}

inline Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  const double c = std::cos(a), s = std::sin(a);
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

/// Quaternion update from body-frame angular velocity, renormalized.
inline Quat integrate_quat(const Quat& q, const Vec3& omega_body, double dt) {
  const Vec3 w = omega_body * dt;
  const double angle = w.norm();
  Quat dq;
  if (angle < 1e-12) {
    dq = Quat(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
  } else {
    dq = Quat(Eigen::AngleAxisd(angle, w / angle));
  }
  Quat out = q * dq;
  out.normalize();
  return out;
}

inline double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

/// Angle between two vectors in [0, pi]; 0 when either is degenerate.
inline double angle_between(const Vec3& a, const Vec3& b) {
  const double na = a.norm(), nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

inline double wrap_two_pi(double phi) {
  const double two_pi = 2.0 * kPi;
  double w = std::fmod(phi, two_pi);
  if (w < 0) w += two_pi;
  return w;
}

}  // namespace climbsim
