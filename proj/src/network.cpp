#include "snl/network.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace snl
{
namespace
{

constexpr double kTruthTolerance = 1e-12;

void check_point(const Point& p, int dimension, const std::string& what)
{
  if (p.size() != dimension)
  {
    throw InvalidInput(what + " has dimension " + std::to_string(p.size()) + ", expected " +
                       std::to_string(dimension));
  }
  if (!p.allFinite())
  {
    throw InvalidInput(what + " has non-finite coordinates");
  }
}

}  // namespace

NetworkInstance::NetworkInstance(int dimension, std::vector<Point> anchors, int n_sensors,
                                 std::vector<EdgeMeasurement> edges, std::optional<std::vector<Point>> sensor_truth)
  : dimension_(dimension)
  , anchors_(std::move(anchors))
  , n_sensors_(n_sensors)
  , edges_(std::move(edges))
  , sensor_truth_(std::move(sensor_truth))
{
  if (dimension_ < 1)
  {
    throw InvalidInput("dimension must be positive");
  }
  if (static_cast<int>(anchors_.size()) < dimension_ + 1)
  {
    throw InvalidInput("need at least d+1 = " + std::to_string(dimension_ + 1) + " anchors, got " +
                       std::to_string(anchors_.size()));
  }
  if (n_sensors_ < 1)
  {
    throw InvalidInput("n_sensors must be positive");
  }
  for (std::size_t k = 0; k < anchors_.size(); ++k)
  {
    check_point(anchors_[k], dimension_, "anchor " + std::to_string(k));
  }
  if (sensor_truth_)
  {
    if (static_cast<int>(sensor_truth_->size()) != n_sensors_)
    {
      throw InvalidInput("sensor ground truth has " + std::to_string(sensor_truth_->size()) +
                         " points, n_sensors is " + std::to_string(n_sensors_));
    }
    for (std::size_t j = 0; j < sensor_truth_->size(); ++j)
    {
      check_point((*sensor_truth_)[j], dimension_, "sensor " + std::to_string(j));
    }
  }

  std::set<std::tuple<int, int, int>> seen;
  for (auto& e : edges_)
  {
    if (!(e.dist >= 0.0) || !std::isfinite(e.dist))
    {
      throw InvalidInput("edge distance must be finite and nonnegative");
    }
    if (e.kind == EdgeKind::SensorSensor)
    {
      if (e.i == e.j)
      {
        throw InvalidInput("sensor-sensor edge with identical endpoints " + std::to_string(e.i));
      }
      if (e.i > e.j)
      {
        std::swap(e.i, e.j);
      }
      if (e.i < 0 || e.j >= n_sensors_)
      {
        throw InvalidInput("sensor-sensor edge index out of range");
      }
    }
    else if (e.i < 0 || e.i >= n_anchors() || e.j < 0 || e.j >= n_sensors_)
    {
      throw InvalidInput("anchor-sensor edge index out of range");
    }
    if (!seen.emplace(e.i, e.j, static_cast<int>(e.kind)).second)
    {
      throw InvalidInput("duplicate edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
    }
    if (sensor_truth_)
    {
      const Point& a = e.kind == EdgeKind::SensorSensor ? (*sensor_truth_)[e.i] : anchors_[e.i];
      const Point& b = (*sensor_truth_)[e.j];
      if (std::abs((a - b).norm() - e.dist) > kTruthTolerance)
      {
        throw InvalidInput("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                           ") distance disagrees with the sensor ground truth");
      }
    }
  }
}

bool NetworkInstance::has_edge(EdgeKind kind, int i, int j) const
{
  if (kind == EdgeKind::SensorSensor && i > j)
  {
    std::swap(i, j);
  }
  return std::any_of(edges_.begin(), edges_.end(),
                     [&](const EdgeMeasurement& e) { return e.kind == kind && e.i == i && e.j == j; });
}

bool NetworkInstance::operator==(const NetworkInstance& other) const
{
  auto same_points = [](const std::vector<Point>& a, const std::vector<Point>& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](const Point& p, const Point& q) {
             return p.size() == q.size() && p == q;
           });
  };
  if (dimension_ != other.dimension_ || n_sensors_ != other.n_sensors_ || edges_ != other.edges_ ||
      !same_points(anchors_, other.anchors_) || sensor_truth_.has_value() != other.sensor_truth_.has_value())
  {
    return false;
  }
  return !sensor_truth_ || same_points(*sensor_truth_, *other.sensor_truth_);
}

NetworkInstance build_unit_disk_instance(const std::vector<Point>& anchor_points,
                                         const std::vector<Point>& sensor_points, double radius)
{
  if (!(radius > 0.0))
  {
    throw InvalidInput("radius must be positive");
  }
  if (anchor_points.empty())
  {
    throw InvalidInput("no anchors given");
  }
  const int d = static_cast<int>(anchor_points.front().size());
  for (std::size_t k = 0; k < anchor_points.size(); ++k)
  {
    check_point(anchor_points[k], d, "anchor " + std::to_string(k));
  }
  for (std::size_t j = 0; j < sensor_points.size(); ++j)
  {
    check_point(sensor_points[j], d, "sensor " + std::to_string(j));
  }

  std::vector<EdgeMeasurement> edges;
  const int n = static_cast<int>(sensor_points.size());
  for (int i = 0; i < n; ++i)
  {
    for (int j = i + 1; j < n; ++j)
    {
      const double dist = (sensor_points[i] - sensor_points[j]).norm();
      if (dist < radius)
      {
        edges.push_back({i, j, EdgeKind::SensorSensor, dist});
      }
    }
  }
  for (int k = 0; k < static_cast<int>(anchor_points.size()); ++k)
  {
    for (int j = 0; j < n; ++j)
    {
      const double dist = (anchor_points[k] - sensor_points[j]).norm();
      if (dist < radius)
      {
        edges.push_back({k, j, EdgeKind::AnchorSensor, dist});
      }
    }
  }
  return NetworkInstance(d, anchor_points, n, std::move(edges), sensor_points);
}

std::pair<const Point*, const Point*> edge_endpoints(const NetworkInstance& instance,
                                                     const std::vector<Point>& positions,
                                                     const EdgeMeasurement& edge)
{
  const Point* a = edge.kind == EdgeKind::SensorSensor ? &positions[edge.i] : &instance.anchors()[edge.i];
  return {a, &positions[edge.j]};
}

double residual_error(const NetworkInstance& instance, const std::vector<Point>& positions, ResidualNorm norm)
{
  if (static_cast<int>(positions.size()) != instance.n_sensors())
  {
    throw InvalidInput("expected " + std::to_string(instance.n_sensors()) + " positions, got " +
                       std::to_string(positions.size()));
  }
  for (std::size_t j = 0; j < positions.size(); ++j)
  {
    check_point(positions[j], instance.dimension(), "position " + std::to_string(j));
  }
  double total = 0.0;
  for (const auto& e : instance.edges())
  {
    auto [a, b] = edge_endpoints(instance, positions, e);
    const double len = (*a - *b).norm();
    total += norm == ResidualNorm::AbsoluteLength ? std::abs(len - e.dist) : std::abs(len * len - e.dist * e.dist);
  }
  return total;
}

double rmsd(const std::vector<Point>& a, const std::vector<Point>& b)
{
  if (a.size() != b.size() || a.empty())
  {
    throw InvalidInput("rmsd needs two non-empty lists of equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    sum += (a[i] - b[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

// JSON -----------------------------------------------------------------------

namespace
{

using nlohmann::json;

json points_to_json(const std::vector<Point>& points)
{
  json out = json::array();
  for (const auto& p : points)
  {
    out.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  }
  return out;
}

const json& require(const json& obj, const char* key)
{
  if (!obj.is_object() || !obj.contains(key))
  {
    throw ParseError(std::string("missing field \"") + key + "\"");
  }
  return obj.at(key);
}

int require_int(const json& obj, const char* key)
{
  const json& v = require(obj, key);
  if (!v.is_number_integer())
  {
    throw ParseError(std::string("field \"") + key + "\" must be an integer");
  }
  return v.get<int>();
}

std::vector<Point> points_from_json(const json& arr, const char* key)
{
  if (!arr.is_array())
  {
    throw ParseError(std::string("field \"") + key + "\" must be an array of coordinate arrays");
  }
  std::vector<Point> out;
  for (const auto& row : arr)
  {
    if (!row.is_array())
    {
      throw ParseError(std::string("field \"") + key + "\" must be an array of coordinate arrays");
    }
    Point p(static_cast<Eigen::Index>(row.size()));
    for (std::size_t c = 0; c < row.size(); ++c)
    {
      if (!row[c].is_number())
      {
        throw ParseError(std::string("field \"") + key + "\" contains a non-numeric coordinate");
      }
      p[static_cast<Eigen::Index>(c)] = row[c].get<double>();
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::string to_json_string(const NetworkInstance& instance)
{
  json doc;
  doc["dimension"] = instance.dimension();
  doc["anchors"] = points_to_json(instance.anchors());
  if (instance.sensor_truth())
  {
    doc["sensors"] = points_to_json(*instance.sensor_truth());
  }
  doc["n_sensors"] = instance.n_sensors();
  json edges = json::array();
  for (const auto& e : instance.edges())
  {
    edges.push_back({{"kind", e.kind == EdgeKind::SensorSensor ? "ss" : "as"}, {"i", e.i}, {"j", e.j}, {"dist", e.dist}});
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2);
}

NetworkInstance instance_from_json_string(const std::string& text)
{
  json doc;
  try
  {
    doc = json::parse(text);
  }
  catch (const json::parse_error& e)
  {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }

  const int dimension = require_int(doc, "dimension");
  std::vector<Point> anchors = points_from_json(require(doc, "anchors"), "anchors");
  const int n_sensors = require_int(doc, "n_sensors");
  std::optional<std::vector<Point>> sensors;
  if (doc.contains("sensors") && !doc.at("sensors").is_null())
  {
    sensors = points_from_json(doc.at("sensors"), "sensors");
  }

  const json& edge_arr = require(doc, "edges");
  if (!edge_arr.is_array())
  {
    throw ParseError("field \"edges\" must be an array");
  }
  std::vector<EdgeMeasurement> edges;
  for (const auto& item : edge_arr)
  {
    const json& kind = require(item, "kind");
    EdgeMeasurement e;
    if (kind == "ss")
    {
      e.kind = EdgeKind::SensorSensor;
    }
    else if (kind == "as")
    {
      e.kind = EdgeKind::AnchorSensor;
    }
    else
    {
      throw ParseError("field \"kind\" must be \"ss\" or \"as\"");
    }
    e.i = require_int(item, "i");
    e.j = require_int(item, "j");
    const json& dist = require(item, "dist");
    if (!dist.is_number())
    {
      throw ParseError("field \"dist\" must be a number");
    }
    e.dist = dist.get<double>();
    edges.push_back(e);
  }
  return NetworkInstance(dimension, std::move(anchors), n_sensors, std::move(edges), std::move(sensors));
}

void save_instance(const NetworkInstance& instance, const std::filesystem::path& destination)
{
  std::ofstream out(destination);
  if (!out)
  {
    throw std::runtime_error("cannot write " + destination.string());
  }
  out << to_json_string(instance) << '\n';
}

NetworkInstance load_instance(const std::filesystem::path& source)
{
  std::ifstream in(source);
  if (!in)
  {
    throw std::runtime_error("cannot read " + source.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return instance_from_json_string(buffer.str());
}

}  // namespace snl
