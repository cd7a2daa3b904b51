#include "lyhlab/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "lyhlab/error.hpp"

namespace lyhlab::flow {
namespace {

std::string snapshot_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%04zu.csv", k);
  return buf;
}

}  // namespace

int write_trajectory(const FlowTrajectory& trajectory, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const int n = trajectory.model().complex_dimension;

  nlohmann::ordered_json manifest;
  manifest["model"] = geom::to_string(trajectory.model().kind);
  manifest["complex_dimension"] = n;
  manifest["periods"] = trajectory.model().periods;
  manifest["resolution"] = trajectory.model().grid_resolution;
  manifest["epsilon"] = trajectory.epsilon();
  manifest["a0"] = trajectory.a0();
  manifest["source"] = trajectory.source().name();
  nlohmann::ordered_json snaps = nlohmann::ordered_json::array();

  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const FlowSnapshot snap = trajectory.snapshot(k);
    const std::string name = snapshot_name(k);
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("output: cannot write " + (dir / name).string());
    out << "node";
    for (int i = 1; i <= n; ++i) out << ",re_z" << i << ",im_z" << i;
    out << ",u,v\n" << std::setprecision(17);
    for (std::size_t p = 0; p < snap.u.size(); ++p) {
      const ChartPoint z = snap.u.grid->point(p);
      out << p;
      for (int i = 0; i < n; ++i) out << ',' << z[i].real() << ',' << z[i].imag();
      out << ',' << snap.u[p].real() << ',' << snap.v[p].real() << '\n';
    }
    snaps.push_back({{"file", name}, {"t", snap.t}, {"a", snap.state.a}});
  }
  manifest["snapshots"] = snaps;
  std::ofstream out(dir / "trajectory.json");
  out << manifest.dump(2) << '\n';
  return static_cast<int>(trajectory.size()) + 1;
}

}  // namespace lyhlab::flow
