#include "moda/geometry.hpp"

#include <span>

#include "moda/resample.hpp"

namespace moda {

Grid<double> warp_coordinates(const DepthMap& depth1, const EgoPose& ego, const MotionMap& motion,
                              const Intrinsics& K) {
  require_same_extent(depth1, motion, "inverse_warp depth/motion");
  require_channels(depth1, 1, "inverse_warp depth");
  require_channels(motion, 3, "inverse_warp motion");
  K.validate();

  const Matrix3<double> R = rotation_matrix(ego.rotation);
  Grid<double> coords(depth1.height(), depth1.width(), 3);
  for (Index r = 0; r < depth1.height(); ++r) {
    for (Index c = 0; c < depth1.width(); ++c) {
      const Vector3<double> P = backproject(static_cast<double>(c), static_cast<double>(r),
                                            static_cast<double>(depth1(r, c)), K);
      const Vector3<double> psi = motion.pixel(r, c).cast<double>();
      const Vector3<double> moved = R * P + ego.translation + psi;
      if (moved.z() > 0.0) {
        const Vector2<double> uv = project(moved, K);
        coords(r, c, 0) = uv.x();
        coords(r, c, 1) = uv.y();
      } else {
        coords(r, c, 0) = std::numeric_limits<double>::quiet_NaN();
        coords(r, c, 1) = std::numeric_limits<double>::quiet_NaN();
      }
      coords(r, c, 2) = moved.z();
    }
  }
  return coords;
}

WarpResult inverse_warp(const ImageMap& frame2, const DepthMap& depth1, const EgoPose& ego,
                        const MotionMap& motion, const Intrinsics& K) {
  require_same_extent(frame2, depth1, "inverse_warp frame2/depth1");
  require_channels(frame2, 3, "inverse_warp frame2");
  const Grid<double> coords = warp_coordinates(depth1, ego, motion, K);

  WarpResult out{ImageMap(frame2.height(), frame2.width(), 3),
                 BinaryMask(frame2.height(), frame2.width(), 1)};
  for (Index r = 0; r < frame2.height(); ++r) {
    for (Index c = 0; c < frame2.width(); ++c) {
      if (!(coords(r, c, 2) > 0.0)) continue;
      auto dst = out.image.pixel(r, c);
      if (bilinear_sample_into(frame2, coords(r, c, 0), coords(r, c, 1),
                               std::span<float>(dst.data(), 3))) {
        out.validity(r, c) = 1;
      }
    }
  }
  return out;
}

double photometric_loss(const ImageMap& recon, const ImageMap& target, const BinaryMask& validity) {
  require_same_extent(recon, target, "photometric_loss");
  require_same_extent(recon, validity, "photometric_loss validity");
  if (recon.channels() != target.channels()) throw ShapeError("photometric_loss: channel mismatch");

  double total = 0.0;
  Index valid = 0;
  for (Index r = 0; r < recon.height(); ++r) {
    for (Index c = 0; c < recon.width(); ++c) {
      if (!validity(r, c)) continue;
      ++valid;
      total += (recon.pixel(r, c) - target.pixel(r, c)).cast<double>().cwiseAbs().mean();
    }
  }
  return valid ? total / static_cast<double>(valid) : 0.0;
}

}  // namespace moda
