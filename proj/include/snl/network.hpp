#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace snl
{

/// Coordinates of an anchor or sensor; the length is the instance dimension.
using Point = Eigen::VectorXd;

/// Raised when inputs violate a documented precondition or invariant.
class InvalidInput : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an instance file cannot be decoded. The message names the field.
class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class EdgeKind
{
  SensorSensor,
  AnchorSensor,
};

/// A measured distance. For AnchorSensor edges `i` indexes anchors and `j` sensors.
struct EdgeMeasurement
{
  int i = 0;
  int j = 0;
  EdgeKind kind = EdgeKind::SensorSensor;
  double dist = 0.0;

  bool operator==(const EdgeMeasurement&) const = default;
};

/// Anchors, sensors and exact distance measurements.
///
/// Anchor-anchor pairs are never stored: anchor positions are known. Sensor-sensor
/// edges are normalized so that i < j.
class NetworkInstance
{
public:
  NetworkInstance() = default;

  /// Validates every invariant; throws InvalidInput on violation.
  NetworkInstance(int dimension, std::vector<Point> anchors, int n_sensors, std::vector<EdgeMeasurement> edges,
                  std::optional<std::vector<Point>> sensor_truth = std::nullopt);

  int dimension() const { return dimension_; }
  int n_anchors() const { return static_cast<int>(anchors_.size()); }
  int n_sensors() const { return n_sensors_; }
  const std::vector<Point>& anchors() const { return anchors_; }
  const std::vector<EdgeMeasurement>& edges() const { return edges_; }
  const std::optional<std::vector<Point>>& sensor_truth() const { return sensor_truth_; }

  bool has_edge(EdgeKind kind, int i, int j) const;

  bool operator==(const NetworkInstance& other) const;

private:
  int dimension_ = 0;
  std::vector<Point> anchors_;
  int n_sensors_ = 0;
  std::vector<EdgeMeasurement> edges_;
  std::optional<std::vector<Point>> sensor_truth_;
};

/// Connects every sensor-sensor and anchor-sensor pair at distance strictly below `radius`.
NetworkInstance build_unit_disk_instance(const std::vector<Point>& anchor_points,
                                         const std::vector<Point>& sensor_points, double radius);

enum class ResidualNorm
{
  AbsoluteLength,  // sum | |p_i - p_j| - d |
  SquaredLength,   // sum | |p_i - p_j|^2 - d^2 |
};

/// Total edge-length error of candidate sensor positions against the measurements.
double residual_error(const NetworkInstance& instance, const std::vector<Point>& positions,
                      ResidualNorm norm = ResidualNorm::AbsoluteLength);

/// Root-mean-square distance between two equally sized point lists.
double rmsd(const std::vector<Point>& a, const std::vector<Point>& b);

/// Endpoint coordinates of an edge; anchors come from the instance, sensors from `positions`.
std::pair<const Point*, const Point*> edge_endpoints(const NetworkInstance& instance,
                                                     const std::vector<Point>& positions,
                                                     const EdgeMeasurement& edge);

std::string to_json_string(const NetworkInstance& instance);
NetworkInstance instance_from_json_string(const std::string& text);

void save_instance(const NetworkInstance& instance, const std::filesystem::path& destination);
NetworkInstance load_instance(const std::filesystem::path& source);

}  // namespace snl
