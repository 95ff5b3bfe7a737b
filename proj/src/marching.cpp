#include "hambvp/marching.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hambvp {

namespace {

#include "mc_tables.inc"

const int kMcVertexOffset[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1},
                                   {0, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1}};
const int kMcEdgeVertex[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                  {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

/// Crossing parameter in [0,1] between nodes with values fa, fb; one secant
/// refinement against a re-evaluated field value when available.
template <typename Point>
double edge_crossing(double fa, double fb, const Point& a, const Point& b,
                     const std::function<double(const Point&)>* refine) {
  double t = fa / (fa - fb);
  if (!refine) return t;
  const Point xt = a + t * (b - a);
  const double ft = (*refine)(xt);
  if (ft == 0.0) return t;
  // false-position step keeping the bracket
  double lo = 0.0, flo = fa, hi = 1.0, fhi = fb;
  if ((ft > 0) == (fa > 0)) {
    lo = t;
    flo = ft;
  } else {
    hi = t;
    fhi = ft;
  }
  if (flo == fhi) return t;
  const double t2 = lo - flo * (hi - lo) / (fhi - flo);
  return std::clamp(t2, 0.0, 1.0);
}

}  // namespace

Segments2 marching_squares(const Eigen::MatrixXd& field, const GridSpec2& grid,
                           const std::function<double(const Eigen::Vector2d&)>* refine) {
  Segments2 out;
  std::map<std::array<int, 3>, int> edge_vertex;  // (ix, iy, axis) -> vertex id

  auto vertex_on = [&](int ix, int iy, int axis) {
    const std::array<int, 3> key{ix, iy, axis};
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const Eigen::Vector2d a = grid.node(ix, iy);
    const Eigen::Vector2d b = axis == 0 ? grid.node(ix + 1, iy) : grid.node(ix, iy + 1);
    const double fa = field(ix, iy);
    const double fb = axis == 0 ? field(ix + 1, iy) : field(ix, iy + 1);
    const double t = edge_crossing(fa, fb, a, b, refine);
    out.vertices.push_back(a + t * (b - a));
    const int id = static_cast<int>(out.vertices.size()) - 1;
    edge_vertex.emplace(key, id);
    return id;
  };

  for (int iy = 0; iy + 1 < grid.ny; ++iy)
    for (int ix = 0; ix + 1 < grid.nx; ++ix) {
      const double f00 = field(ix, iy), f10 = field(ix + 1, iy);
      const double f11 = field(ix + 1, iy + 1), f01 = field(ix, iy + 1);
      int c = 0;
      if (f00 < 0) c |= 1;
      if (f10 < 0) c |= 2;
      if (f11 < 0) c |= 4;
      if (f01 < 0) c |= 8;
      if (c == 0 || c == 15) continue;

      const int e_bottom = 0, e_right = 1, e_top = 2, e_left = 3;
      auto edge_id = [&](int e) {
        switch (e) {
          case 0: return vertex_on(ix, iy, 0);
          case 1: return vertex_on(ix + 1, iy, 1);
          case 2: return vertex_on(ix, iy + 1, 0);
          default: return vertex_on(ix, iy, 1);
        }
      };
      auto emit = [&](int ea, int eb) { out.segments.push_back({edge_id(ea), edge_id(eb)}); };

      switch (c) {
        case 1: case 14: emit(e_left, e_bottom); break;
        case 2: case 13: emit(e_bottom, e_right); break;
        case 3: case 12: emit(e_left, e_right); break;
        case 4: case 11: emit(e_right, e_top); break;
        case 6: case 9: emit(e_bottom, e_top); break;
        case 7: case 8: emit(e_left, e_top); break;
        case 5:
        case 10: {
          // ambiguous saddle; asymptotic decider on the bilinear interpolant
          const double denom = f00 + f11 - f10 - f01;
          const double saddle = denom != 0.0 ? (f00 * f11 - f10 * f01) / denom : 0.0;
          // contours enclose the corners whose sign differs from the saddle value
          const bool enclose_v0_v2 = (c == 5) == (saddle > 0.0);
          if (enclose_v0_v2) {
            emit(e_left, e_bottom);
            emit(e_right, e_top);
          } else {
            emit(e_bottom, e_right);
            emit(e_left, e_top);
          }
          break;
        }
        default: break;
      }
    }
  return out;
}

Triangles3 marching_cubes(const std::vector<double>& field, const GridSpec3& grid,
                          const std::function<double(const Eigen::Vector3d&)>* refine) {
  Triangles3 out;
  std::map<std::array<int, 4>, int> edge_vertex;  // (ix, iy, iz, axis) -> vertex id
  auto sample = [&](int ix, int iy, int iz) { return field[ix + grid.nx * (iy + static_cast<size_t>(grid.ny) * iz)]; };

  auto vertex_on = [&](int ix, int iy, int iz, int axis) {
    const std::array<int, 4> key{ix, iy, iz, axis};
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    int jx = ix + (axis == 0), jy = iy + (axis == 1), jz = iz + (axis == 2);
    const Eigen::Vector3d a = grid.node(ix, iy, iz), b = grid.node(jx, jy, jz);
    const double t = edge_crossing(sample(ix, iy, iz), sample(jx, jy, jz), a, b, refine);
    out.vertices.push_back(a + t * (b - a));
    const int id = static_cast<int>(out.vertices.size()) - 1;
    edge_vertex.emplace(key, id);
    return id;
  };

  for (int iz = 0; iz + 1 < grid.nz; ++iz)
    for (int iy = 0; iy + 1 < grid.ny; ++iy)
      for (int ix = 0; ix + 1 < grid.nx; ++ix) {
        int cube = 0;
        for (int v = 0; v < 8; ++v) {
          const int vx = ix + kMcVertexOffset[v][0];
          const int vy = iy + kMcVertexOffset[v][1];
          const int vz = iz + kMcVertexOffset[v][2];
          if (sample(vx, vy, vz) < 0) cube |= (1 << v);
        }
        if (kMcEdgeTable[cube] == 0) continue;

        int ids[12];
        for (int e = 0; e < 12; ++e) {
          if (!(kMcEdgeTable[cube] & (1 << e))) continue;
          const int va = kMcEdgeVertex[e][0], vb = kMcEdgeVertex[e][1];
          // edge anchored at the lower of its two cube corners
          const int ax[3] = {kMcVertexOffset[va][0], kMcVertexOffset[va][1], kMcVertexOffset[va][2]};
          const int bx[3] = {kMcVertexOffset[vb][0], kMcVertexOffset[vb][1], kMcVertexOffset[vb][2]};
          int axis = 0;
          for (int d = 0; d < 3; ++d)
            if (ax[d] != bx[d]) axis = d;
          const int ox = ix + std::min(ax[0], bx[0]);
          const int oy = iy + std::min(ax[1], bx[1]);
          const int oz = iz + std::min(ax[2], bx[2]);
          ids[e] = vertex_on(ox, oy, oz, axis);
        }
        for (int t = 0; kMcTriTable[cube][t] != -1; t += 3)
          out.triangles.push_back({ids[kMcTriTable[cube][t]], ids[kMcTriTable[cube][t + 1]],
                                   ids[kMcTriTable[cube][t + 2]]});
      }
  return out;
}

std::vector<std::vector<int>> chain_polylines(const Segments2& seg) {
  const int nv = static_cast<int>(seg.vertices.size());
  std::vector<std::vector<int>> incident(nv);
  for (int s = 0; s < static_cast<int>(seg.segments.size()); ++s) {
    incident[seg.segments[s][0]].push_back(s);
    incident[seg.segments[s][1]].push_back(s);
  }
  std::vector<bool> used(seg.segments.size(), false);
  std::vector<std::vector<int>> polylines;

  auto walk = [&](int start_vertex) {
    std::vector<int> line{start_vertex};
    int v = start_vertex;
    for (;;) {
      int next_seg = -1;
      for (int s : incident[v])
        if (!used[s]) {
          next_seg = s;
          break;
        }
      if (next_seg < 0) break;
      used[next_seg] = true;
      v = seg.segments[next_seg][0] == v ? seg.segments[next_seg][1] : seg.segments[next_seg][0];
      line.push_back(v);
      if (v == start_vertex) break;
    }
    return line;
  };

  // open chains first (endpoints have odd degree), then closed loops
  for (int v = 0; v < nv; ++v) {
    int free_deg = 0;
    for (int s : incident[v])
      if (!used[s]) ++free_deg;
    if (free_deg == 1) polylines.push_back(walk(v));
  }
  for (int v = 0; v < nv; ++v) {
    for (int s : incident[v])
      if (!used[s]) {
        polylines.push_back(walk(v));
        break;
      }
  }
  return polylines;
}

}  // namespace hambvp
