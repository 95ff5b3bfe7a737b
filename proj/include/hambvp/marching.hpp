#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace hambvp {

struct GridSpec2 {
  Eigen::Vector2d lo, hi;
  int nx = 0, ny = 0;  // node counts per axis

  Eigen::Vector2d node(int ix, int iy) const {
    return {lo[0] + (hi[0] - lo[0]) * ix / (nx - 1), lo[1] + (hi[1] - lo[1]) * iy / (ny - 1)};
  }
};

struct GridSpec3 {
  Eigen::Vector3d lo, hi;
  int nx = 0, ny = 0, nz = 0;

  Eigen::Vector3d node(int ix, int iy, int iz) const {
    return {lo[0] + (hi[0] - lo[0]) * ix / (nx - 1), lo[1] + (hi[1] - lo[1]) * iy / (ny - 1),
            lo[2] + (hi[2] - lo[2]) * iz / (nz - 1)};
  }
  double cell_diameter() const {
    Eigen::Vector3d d((hi[0] - lo[0]) / (nx - 1), (hi[1] - lo[1]) / (ny - 1), (hi[2] - lo[2]) / (nz - 1));
    return d.norm();
  }
};

struct Segments2 {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 2>> segments;
};

struct Triangles3 {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// Zero-level contour of a sampled field (nx x ny, field(ix, iy)).
/// Ambiguous cells are resolved with the asymptotic decider (sign of the
/// bilinear saddle value). The optional refine callback re-evaluates the
/// field so every crossing gets one secant correction along its grid edge.
Segments2 marching_squares(const Eigen::MatrixXd& field, const GridSpec2& grid,
                           const std::function<double(const Eigen::Vector2d&)>* refine = nullptr);

/// Zero-level isosurface by the 256-case marching-cubes tables. Field is
/// sampled at idx = ix + nx*(iy + ny*iz).
Triangles3 marching_cubes(const std::vector<double>& field, const GridSpec3& grid,
                          const std::function<double(const Eigen::Vector3d&)>* refine = nullptr);

/// Chain marching-squares segments into ordered polylines (closed ones wrap).
std::vector<std::vector<int>> chain_polylines(const Segments2& seg);

}  // namespace hambvp
