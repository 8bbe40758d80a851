#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "motsim/numerics.hpp"

namespace motsim {

/// Cell-centered rectangular mesh covering [0,lx] x [0,ly] with nx*ny cells.
/// Cell (i,j) has its center at ((i+1/2)hx, (j+1/2)hy).
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;

  double hx() const { return lx / nx; }
  double hy() const { return ly / ny; }
  double cell_area() const { return hx() * hy(); }
  double domain_area() const { return lx * ly; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  double x_center(int i) const { return (i + 0.5) * hx(); }
  double y_center(int j) const { return (j + 0.5) * hy(); }

  bool operator==(const GridSpec&) const = default;
};

/// Grid constraints: nx, ny >= 4 and positive side lengths.
std::vector<std::string> validate_grid(const GridSpec& g);

/// Scalar field stored row-major as an nx-by-ny array: index (i,j) = i*ny + j,
/// i the x cell index. The grid is carried by value; fields are plain values
/// and safe to copy, move and share across threads as read-only data.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0)
      : grid_(g), data_(g.cell_count(), fill) {}

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * grid_.ny + j;
  }
  double operator()(int i, int j) const { return data_[index(i, j)]; }
  double& operator()(int i, int j) { return data_[index(i, j)]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool same_shape(const ScalarField& other) const { return grid_ == other.grid_; }

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

/// Sum over cells of phi * cell_area (the discrete integral).
double field_integral(const ScalarField& phi);
/// Mean value, integral / domain_area.
double field_mean(const ScalarField& phi);
double field_min(const ScalarField& phi);
double field_max(const ScalarField& phi);
/// max over cells of |phi - shift|.
double field_max_abs(const ScalarField& phi, double shift = 0.0);
bool field_all_finite(const ScalarField& phi);

}  // namespace motsim
