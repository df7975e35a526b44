#pragma once

#include "hjm/common.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hjm {

// One rectangular axis of nodes min + j*dx, j = 0..n-1, dx = (max-min)/(n-1).
// A periodic axis identifies node n with node 0, so it covers [min, min+n*dx).
struct GridAxis {
    double min = 0;
    double max = 1;
    int n = 2;
    bool periodic = false;

    double dx() const { return (max - min) / (n - 1); }
    double period() const { return n * dx(); }
};

GridAxis make_axis(double min, double max, int n, bool periodic);

// Tensor-product grid, row-major flattening with the last axis fastest.
struct Grid {
    std::vector<GridAxis> axes;

    int dim() const { return static_cast<int>(axes.size()); }
    long size() const;
    long flat_index(const std::vector<int>& multi) const;
    std::vector<int> multi_index(long flat) const;
    Vec point(const std::vector<int>& multi) const;
};

class GridFunction {
  public:
    explicit GridFunction(Grid grid);

    const Grid& grid() const { return grid_; }
    Eigen::VectorXd& values() { return values_; }
    const Eigen::VectorXd& values() const { return values_; }

    void fill(const std::function<double(const Vec&)>& f);

    // Multilinear interpolation; wraps periodic axes, throws OutOfGrid beyond
    // the span of a bounded axis.
    double interpolate(const Vec& q) const;

  private:
    Grid grid_;
    Eigen::VectorXd values_;
};

// Little-endian container: magic "HJGRIDF\0", u32 version, u32 dim, then per
// axis f64 min, f64 max, u32 n, u32 periodic, then f64 node values row-major.
void write_grid_binary(const std::string& path, const GridFunction& f);
GridFunction read_grid_binary(const std::string& path);

void write_grid_csv(std::ostream& out, const GridFunction& f);
void write_grid_csv(const std::string& path, const GridFunction& f);

}  // namespace hjm
