#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace flatgen {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Thrown when the flat transform hits a configuration it cannot invert.
class TransformError : public std::runtime_error {
 public:
  enum class Kind {
    degenerate_force,      // desired force vanished, attitude undefined
    euler_degenerate,      // body y-axis vertical, yaw/pitch split undefined
    singular_flap_matrix,  // flap effectiveness collapsed, moments unassignable
  };

  TransformError(Kind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace flatgen
