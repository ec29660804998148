#include "csm/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "csm/csv.hpp"
#include "csm/error.hpp"

namespace csm::mapper {
namespace {

template <typename Times>
void check_ordered(const Times& ts, const char* which) {
  for (std::size_t k = 1; k < ts.size(); ++k) {
    if (ts[k].t < ts[k - 1].t) {
      throw std::invalid_argument(std::string("synchronize: ") + which + " is not time-ordered");
    }
  }
}

// Index of the element of `s` nearest to t; ties resolve to the lower index.
std::size_t nearest(std::span<const RobotObservation> s, double t) {
  const auto it = std::lower_bound(s.begin(), s.end(), t,
                                   [](const RobotObservation& o, double v) { return o.t < v; });
  const auto k = static_cast<std::size_t>(it - s.begin());
  if (k == 0) {
    return 0;
  }
  std::size_t before = k - 1;
  while (before > 0 && s[before - 1].t == s[before].t) {
    --before;
  }
  if (k == s.size() || std::abs(s[before].t - t) <= std::abs(s[k].t - t)) {
    return before;
  }
  return k;
}

}  // namespace

SyncResult synchronize(std::span<const RobotObservation> stream1,
                       std::span<const RobotObservation> stream2, double tolerance) {
  if (!(tolerance >= 0.0)) {
    throw std::invalid_argument("synchronize: tolerance must be nonnegative");
  }
  check_ordered(stream1, "stream1");
  check_ordered(stream2, "stream2");
  SyncResult out;
  if (stream1.empty() || stream2.empty()) {
    out.dropped_first = stream1.size();
    out.dropped_second = stream2.size();
    return out;
  }
  for (std::size_t i = 0; i < stream1.size(); ++i) {
    const std::size_t j = nearest(stream2, stream1[i].t);
    if (std::abs(stream1[i].t - stream2[j].t) > tolerance) {
      continue;
    }
    if (nearest(stream1, stream2[j].t) != i) {
      continue;
    }
    out.pairs.push_back({0.5 * (stream1[i].t + stream2[j].t), stream1[i], stream2[j]});
  }
  out.dropped_first = stream1.size() - out.pairs.size();
  out.dropped_second = stream2.size() - out.pairs.size();
  return out;
}

SourceEstimate map_source(const RobotObservation& obs1, const RobotObservation& obs2,
                          double eps) {
  const UnitVec3 d1 = geom::rotate_to_map(obs1.pose, obs1.doa_body);
  const UnitVec3 d2 = geom::rotate_to_map(obs2.pose, obs2.doa_body);
  const TriangulationResult tri =
      geom::ray_to_ray(obs1.pose.position, d1, obs2.pose.position, d2, eps);
  SourceEstimate est;
  est.t = 0.5 * (obs1.t + obs2.t);
  est.position = tri.point;
  est.gap = tri.gap;
  est.theta_est = angle_between_deg(d1, d2);
  est.degenerate =
      tri.degenerate || (obs1.pose.position - obs2.pose.position).norm() < kMinBaseline;
  est.behind = tri.behind;
  return est;
}

std::vector<SourceEstimate> map_stream(std::span<const ObservationPair> pairs, double eps) {
  std::vector<SourceEstimate> out;
  out.reserve(pairs.size());
  for (const ObservationPair& p : pairs) {
    SourceEstimate e = map_source(p.first, p.second, eps);
    e.t = p.t;
    out.push_back(e);
  }
  return out;
}

void write_observations_csv(const std::string& path, std::span<const RobotObservation> obs) {
  using csv::format;
  std::ostringstream s;
  s << "t,px,py,pz,qw,qx,qy,qz,dx,dy,dz,power\n";
  for (const RobotObservation& o : obs) {
    const Quaternion& q = o.pose.orientation;
    s << format(o.t) << ',' << format(o.pose.position.x()) << ','
      << format(o.pose.position.y()) << ',' << format(o.pose.position.z()) << ','
      << format(q.w) << ',' << format(q.x) << ',' << format(q.y) << ',' << format(q.z) << ','
      << format(o.doa_body.x()) << ',' << format(o.doa_body.y()) << ','
      << format(o.doa_body.z()) << ',' << format(o.power) << '\n';
  }
  csv::write_file(path, s.str());
}

std::vector<RobotObservation> read_observations_csv(const std::string& path) {
  const csv::Table table = csv::read(path);
  const char* names[] = {"t", "px", "py", "pz", "qw", "qx", "qy", "qz", "dx", "dy", "dz", "power"};
  std::size_t col[12];
  for (std::size_t k = 0; k < 12; ++k) {
    col[k] = table.column(names[k], path);
  }
  std::vector<RobotObservation> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    double v[12];
    for (std::size_t k = 0; k < 12; ++k) {
      v[k] = csv::parse_double(table.rows[r][col[k]], path, r + 1);
    }
    const Quaternion q{v[4], v[5], v[6], v[7]};
    const Vec3 d(v[8], v[9], v[10]);
    if (std::abs(q.norm() - 1.0) > 1e-6 || std::abs(d.norm() - 1.0) > 1e-6) {
      throw ConfigError(path + ": row " + std::to_string(r + 1) +
                        ": quaternion and DoA must be unit-norm");
    }
    RobotObservation o;
    o.t = v[0];
    o.pose.position = Vec3(v[1], v[2], v[3]);
    // Values written by this tool round-trip exactly; only renormalize input
    // that is off by more than the unit-norm tolerance.
    o.pose.orientation = q.is_unit() ? q : Quaternion::normalized(q.w, q.x, q.y, q.z);
    o.doa_body = std::abs(d.norm() - 1.0) <= UnitVec3::kNormTolerance ? UnitVec3::from_unit(d)
                                                                       : UnitVec3::normalized(d);
    o.power = v[11];
    out.push_back(o);
  }
  return out;
}

void write_estimates_csv(const std::string& path, std::span<const SourceEstimate> estimates) {
  using csv::format;
  std::ostringstream s;
  s << "t,x,y,z,gap,theta,degenerate\n";
  for (const SourceEstimate& e : estimates) {
    s << format(e.t) << ',' << format(e.position.x()) << ',' << format(e.position.y()) << ','
      << format(e.position.z()) << ',' << format(e.gap) << ',' << format(e.theta_est) << ','
      << (e.degenerate ? 1 : 0) << '\n';
  }
  csv::write_file(path, s.str());
}

std::vector<SourceEstimate> read_estimates_csv(const std::string& path) {
  const csv::Table table = csv::read(path);
  const char* names[] = {"t", "x", "y", "z", "gap", "theta", "degenerate"};
  std::size_t col[7];
  for (std::size_t k = 0; k < 7; ++k) {
    col[k] = table.column(names[k], path);
  }
  std::vector<SourceEstimate> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    double v[7];
    for (std::size_t k = 0; k < 7; ++k) {
      v[k] = csv::parse_double(table.rows[r][col[k]], path, r + 1);
    }
    SourceEstimate e;
    e.t = v[0];
    e.position = Vec3(v[1], v[2], v[3]);
    e.gap = v[4];
    e.theta_est = v[5];
    e.degenerate = v[6] != 0.0;
    out.push_back(e);
  }
  return out;
}

}  // namespace csm::mapper
