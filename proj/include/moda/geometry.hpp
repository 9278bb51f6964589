#pragma once

#include <Eigen/Core>

#include <cmath>

#include "moda/grid.hpp"

namespace moda {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

/// Pinhole intrinsics; pixel centres sit at integer coordinates.
template <typename Scalar>
struct CameraIntrinsics {
  Scalar fx{1};
  Scalar fy{1};
  Scalar cx{0};
  Scalar cy{0};

  Matrix3<Scalar> matrix() const {
    Matrix3<Scalar> K;
    K << fx, Scalar(0), cx, Scalar(0), fy, cy, Scalar(0), Scalar(0), Scalar(1);
    return K;
  }

  void validate() const {
    if (!(fx > Scalar(0)) || !(fy > Scalar(0)) || !std::isfinite(static_cast<double>(cx)) ||
        !std::isfinite(static_cast<double>(cy))) {
      throw DomainError("intrinsics: focal lengths must be positive and finite");
    }
  }
};

/// Rigid motion between frames: axis-angle rotation (radians * unit axis) and translation.
template <typename Scalar>
struct Pose {
  Vector3<Scalar> rotation = Vector3<Scalar>::Zero();
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();

  void validate() const {
    if (!rotation.allFinite() || !translation.allFinite()) throw DomainError("pose: non-finite");
    if (rotation.norm() >= Scalar(EIGEN_PI)) throw DomainError("pose: |rotation| must be < pi");
  }
};

using Intrinsics = CameraIntrinsics<double>;
using EgoPose = Pose<double>;

/// Rodrigues' formula. Near zero angle the second-order Taylor expansion is used.
template <typename Scalar>
Matrix3<Scalar> rotation_matrix(const Vector3<Scalar>& axis_angle) {
  Matrix3<Scalar> skew;
  skew << Scalar(0), -axis_angle.z(), axis_angle.y(), axis_angle.z(), Scalar(0), -axis_angle.x(),
      -axis_angle.y(), axis_angle.x(), Scalar(0);
  const Scalar theta2 = axis_angle.squaredNorm();
  Scalar a;
  Scalar b;
  if (theta2 < Scalar(1e-16)) {
    a = Scalar(1) - theta2 / Scalar(6);
    b = Scalar(0.5) - theta2 / Scalar(24);
  } else {
    const Scalar theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (Scalar(1) - std::cos(theta)) / theta2;
  }
  return Matrix3<Scalar>::Identity() + a * skew + b * skew * skew;
}

/// Lifts pixel (u, v) at the given depth into camera coordinates.
template <typename Scalar>
Vector3<Scalar> backproject(Scalar u, Scalar v, Scalar depth, const CameraIntrinsics<Scalar>& K) {
  if (!(depth > Scalar(0))) throw DomainError("backproject: depth must be > 0");
  return depth * Vector3<Scalar>((u - K.cx) / K.fx, (v - K.cy) / K.fy, Scalar(1));
}

/// Perspective projection; caller guarantees point.z() > 0.
template <typename Scalar>
Vector2<Scalar> project(const Vector3<Scalar>& point, const CameraIntrinsics<Scalar>& K) {
  return Vector2<Scalar>(K.fx * point.x() / point.z() + K.cx, K.fy * point.y() / point.z() + K.cy);
}

/// Per-pixel sampling coordinates of the reconstruction: channel 0 = u',
/// channel 1 = v', channel 2 = z' (depth of the moved point in frame 2).
Grid<double> warp_coordinates(const DepthMap& depth1, const EgoPose& ego, const MotionMap& motion,
                              const Intrinsics& K);

struct WarpResult {
  ImageMap image;       // reconstruction of frame 1; 0 where invalid
  BinaryMask validity;  // 1 where the sample was in bounds and in front of the camera
};

/// Reconstructs frame 1 by sampling frame 2 at the projection of
/// R * P + t + motion(i), where P is pixel i lifted with depth1(i).
WarpResult inverse_warp(const ImageMap& frame2, const DepthMap& depth1, const EgoPose& ego,
                        const MotionMap& motion, const Intrinsics& K);

/// Mean absolute RGB difference over validity == 1 pixels (all channels
/// averaged); 0 when no pixel is valid.
double photometric_loss(const ImageMap& recon, const ImageMap& target, const BinaryMask& validity);

}  // namespace moda
