#include "edgevo/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace edgevo {

namespace {

namespace fs = std::filesystem;

struct IndexedEntry {
  double timestamp;
  std::string payload;  // path or pose columns
};

// TUM index files: `timestamp payload...` per line, '#' lines ignored.
std::vector<IndexedEntry> read_index_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing index file: " + path);
  std::vector<IndexedEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    IndexedEntry e;
    if (!(ss >> e.timestamp)) continue;
    std::getline(ss, e.payload);
    const size_t p = e.payload.find_first_not_of(" \t");
    e.payload = p == std::string::npos ? "" : e.payload.substr(p);
    while (!e.payload.empty() && (e.payload.back() == '\r' || e.payload.back() == ' '))
      e.payload.pop_back();
    entries.push_back(std::move(e));
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const IndexedEntry& a, const IndexedEntry& b) {
                     return a.timestamp < b.timestamp;
                   });
  return entries;
}

RigidTransform pose_from_tum_columns(const std::string& cols) {
  std::istringstream ss(cols);
  double tx, ty, tz, qx, qy, qz, qw;
  if (!(ss >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
    throw DataError("malformed pose line: " + cols);
  Eigen::Quaterniond q(qw, qx, qy, qz);
  if (q.norm() < 1e-12) throw DataError("zero quaternion in pose line");
  q.normalize();
  return {q.toRotationMatrix(), {tx, ty, tz}};
}

}  // namespace

std::vector<std::pair<size_t, size_t>> associate_timestamps(const std::vector<double>& a,
                                                            const std::vector<double>& b,
                                                            double max_dt) {
  struct Cand {
    double dt;
    size_t i, j;
  };
  std::vector<Cand> cands;
  // b is sorted by the loaders; scan a window around the closest entry.
  for (size_t i = 0; i < a.size(); ++i) {
    const auto it = std::lower_bound(b.begin(), b.end(), a[i] - max_dt);
    for (size_t j = static_cast<size_t>(it - b.begin()); j < b.size() && b[j] <= a[i] + max_dt;
         ++j)
      cands.push_back({std::fabs(a[i] - b[j]), i, j});
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (x.dt != y.dt) return x.dt < y.dt;
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
  std::vector<uint8_t> used_a(a.size(), 0), used_b(b.size(), 0);
  std::vector<std::pair<size_t, size_t>> pairs;
  for (const Cand& c : cands) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = 1;
    pairs.emplace_back(c.i, c.j);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Sequence load_tum_sequence(const std::string& dir, double max_dt, double depth_scale) {
  const auto rgb = read_index_file((fs::path(dir) / "rgb.txt").string());
  const auto depth = read_index_file((fs::path(dir) / "depth.txt").string());

  std::vector<double> t_rgb, t_depth;
  for (const auto& e : rgb) t_rgb.push_back(e.timestamp);
  for (const auto& e : depth) t_depth.push_back(e.timestamp);
  const auto pairs = associate_timestamps(t_rgb, t_depth, max_dt);
  if (pairs.empty()) throw DataError("load_tum_sequence: no rgb/depth associations in " + dir);

  std::vector<IndexedEntry> gt;
  const std::string gt_path = (fs::path(dir) / "groundtruth.txt").string();
  if (fs::exists(gt_path)) gt = read_index_file(gt_path);
  std::vector<double> t_gt;
  for (const auto& e : gt) t_gt.push_back(e.timestamp);

  Sequence seq;
  seq.depth_scale = depth_scale;
  for (const auto& [i, j] : pairs) {
    SequenceFrame f;
    f.timestamp = rgb[i].timestamp;
    f.rgb_path = (fs::path(dir) / rgb[i].payload).string();
    f.depth_path = (fs::path(dir) / depth[j].payload).string();
    if (!t_gt.empty()) {
      const auto it = std::lower_bound(t_gt.begin(), t_gt.end(), f.timestamp);
      size_t k = static_cast<size_t>(it - t_gt.begin());
      if (k == t_gt.size() || (k > 0 && f.timestamp - t_gt[k - 1] < t_gt[k] - f.timestamp)) --k;
      if (std::fabs(t_gt[k] - f.timestamp) <= max_dt)
        f.ground_truth = pose_from_tum_columns(gt[k].payload);
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

void write_trajectory_tum(const Trajectory& trajectory, const std::string& path) {
  if (trajectory.empty()) throw InvalidInput("write_trajectory_tum: empty trajectory");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  char buf[64];
  for (const auto& e : trajectory) {
    const Eigen::Quaterniond q(e.pose.R);
    std::snprintf(buf, sizeof(buf), "%.6f", e.timestamp);
    out << buf;
    const double vals[7] = {e.pose.t.x(), e.pose.t.y(), e.pose.t.z(),
                            q.x(),        q.y(),        q.z(),       q.w()};
    for (double v : vals) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

Trajectory load_trajectory_tum(const std::string& path) {
  Trajectory out;
  for (const auto& e : read_index_file(path))
    out.push_back({e.timestamp, pose_from_tum_columns(e.payload)});
  return out;
}

void export_pointcloud_ply(const std::vector<Point3>& points, const std::string& path) {
  if (points.empty()) throw InvalidInput("export_pointcloud_ply: no points");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char buf[96];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  if (!out) throw DataError("failed writing " + path);
}

IntrinsicsConfig load_intrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open intrinsics file " + path);
  std::map<std::string, double> kv;
  std::string line;
  while (std::getline(in, line)) {
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError("intrinsics: expected key=value, got: " + line);
    std::string key = line.substr(first, eq - first);
    key.erase(key.find_last_not_of(" \t") + 1);
    kv[key] = std::stod(line.substr(eq + 1));
  }
  for (const char* req : {"fx", "fy", "cx", "cy", "width", "height"})
    if (!kv.count(req)) throw DataError(std::string("intrinsics: missing key ") + req);

  IntrinsicsConfig cfg;
  cfg.K.fx = kv["fx"];
  cfg.K.fy = kv["fy"];
  cfg.K.cx = kv["cx"];
  cfg.K.cy = kv["cy"];
  cfg.K.width = static_cast<int>(kv["width"]);
  cfg.K.height = static_cast<int>(kv["height"]);
  if (kv.count("depth_scale")) cfg.depth_scale = kv["depth_scale"];
  cfg.K.validate();
  if (!(cfg.depth_scale > 0.0)) throw DataError("intrinsics: depth_scale must be positive");
  return cfg;
}

IntrinsicsConfig default_tum_intrinsics() {
  IntrinsicsConfig cfg;
  cfg.K = {525.0, 525.0, 319.5, 239.5, 640, 480};
  cfg.depth_scale = 5000.0;
  return cfg;
}

}  // namespace edgevo
