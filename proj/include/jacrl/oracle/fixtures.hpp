#ifndef JACRL_ORACLE_FIXTURES_HPP_
#define JACRL_ORACLE_FIXTURES_HPP_

#include <Eigen/Dense>
#include <cmath>

#include "jacrl/errors.hpp"

namespace jacrl::oracle {

inline constexpr int kObsDim = 15;

// Closed-form kinematic fixtures used to validate the probe-based Jacobian
// estimator. Each fixture exposes forward kinematics, the exact Jacobian,
// and a 15-dim observation adapter (unused slots zero).
class AnalyticFixture {
 public:
  enum class Kind { TwoLinkArm, ConstantCurvatureSegment, LinearMap };

  static AnalyticFixture two_link_arm(double l1, double l2) {
    AnalyticFixture f;
    f.kind_ = Kind::TwoLinkArm;
    f.l1_ = l1;
    f.l2_ = l2;
    return f;
  }

  static AnalyticFixture constant_curvature(double segment_length) {
    AnalyticFixture f;
    f.kind_ = Kind::ConstantCurvatureSegment;
    f.seg_len_ = segment_length;
    return f;
  }

  // map has one row per actuator, one column per observation slot.
  static AnalyticFixture linear_map(const Eigen::MatrixXd& map) {
    AnalyticFixture f;
    f.kind_ = Kind::LinearMap;
    f.map_ = map;
    return f;
  }

  Kind kind() const { return kind_; }

  int dof() const {
    switch (kind_) {
      case Kind::TwoLinkArm: return 2;
      case Kind::ConstantCurvatureSegment: return 1;
      case Kind::LinearMap: return static_cast<int>(map_.rows());
    }
    return 0;
  }

  // Planar tip position (x, y).
  Eigen::Vector2d tip(const Eigen::VectorXd& q) const {
    switch (kind_) {
      case Kind::TwoLinkArm: {
        const double c1 = std::cos(q[0]), s1 = std::sin(q[0]);
        const double c12 = std::cos(q[0] + q[1]), s12 = std::sin(q[0] + q[1]);
        return {l1_ * c1 + l2_ * c12, l1_ * s1 + l2_ * s12};
      }
      case Kind::ConstantCurvatureSegment: {
        const double kappa = q[0];
        const double kl = kappa * seg_len_;
        if (std::abs(kl) < 1e-4) {
          // Series expansion keeps the kappa -> 0 limit well conditioned.
          const double L = seg_len_;
          const double x = kappa * L * L / 2.0 * (1.0 - kl * kl / 12.0);
          const double y = L * (1.0 - kl * kl / 6.0);
          return {x, y};
        }
        return {(1.0 - std::cos(kl)) / kappa, std::sin(kl) / kappa};
      }
      case Kind::LinearMap:
        throw ShapeMismatch("LinearMap fixture has no planar tip");
    }
    return Eigen::Vector2d::Zero();
  }

  // Full 15-dim observation; kinematic fixtures put the tip in the first
  // two slots, the linear map fills all slots.
  Eigen::VectorXd observe(const Eigen::VectorXd& q) const {
    Eigen::VectorXd o = Eigen::VectorXd::Zero(kObsDim);
    if (kind_ == Kind::LinearMap) {
      o = map_.transpose() * q;
    } else {
      const Eigen::Vector2d p = tip(q);
      o[0] = p[0];
      o[1] = p[1];
    }
    return o;
  }

  // Exact Jacobian. Kinematic fixtures: rows (x, y), columns joints.
  // LinearMap: the map itself (rows actuators, columns observation slots).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& q) const {
    switch (kind_) {
      case Kind::TwoLinkArm: {
        const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
        const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
        Eigen::MatrixXd j(2, 2);
        j << -l1_ * s1 - l2_ * s12, -l2_ * s12,
              l1_ * c1 + l2_ * c12,  l2_ * c12;
        return j;
      }
      case Kind::ConstantCurvatureSegment: {
        const double kappa = q[0];
        const double L = seg_len_;
        const double kl = kappa * L;
        Eigen::MatrixXd j(2, 1);
        if (std::abs(kl) < 1e-4) {
          j(0, 0) = L * L / 2.0 * (1.0 - kl * kl / 4.0);
          j(1, 0) = -kappa * L * L * L / 3.0;
        } else {
          j(0, 0) = (L * std::sin(kl) * kappa - (1.0 - std::cos(kl))) / (kappa * kappa);
          j(1, 0) = (L * std::cos(kl) * kappa - std::sin(kl)) / (kappa * kappa);
        }
        return j;
      }
      case Kind::LinearMap:
        return map_;
    }
    return {};
  }

  // Fully extended or folded arm; zero-curvature is fine for the segment.
  bool singular(const Eigen::VectorXd& q) const {
    if (kind_ == Kind::TwoLinkArm) {
      return std::abs(std::sin(q[1])) < 1e-9;
    }
    return false;
  }

 private:
  Kind kind_ = Kind::LinearMap;
  double l1_ = 1.0, l2_ = 1.0;
  double seg_len_ = 1.0;
  Eigen::MatrixXd map_;
};

}  // namespace jacrl::oracle

#endif  // JACRL_ORACLE_FIXTURES_HPP_
