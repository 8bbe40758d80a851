#include "motsim/grid.hpp"

#include <cmath>

namespace motsim {

std::vector<std::string> validate_grid(const GridSpec& g) {
  std::vector<std::string> errors;
  if (g.nx < 4) errors.push_back("grid.nx must be at least 4 (got " + std::to_string(g.nx) + ")");
  if (g.ny < 4) errors.push_back("grid.ny must be at least 4 (got " + std::to_string(g.ny) + ")");
  if (!(g.lx > 0.0) || !std::isfinite(g.lx))
    errors.push_back("grid.lx must be positive and finite");
  if (!(g.ly > 0.0) || !std::isfinite(g.ly))
    errors.push_back("grid.ly must be positive and finite");
  return errors;
}

double field_integral(const ScalarField& phi) {
  return pairwise_sum(phi.data()) * phi.grid().cell_area();
}

double field_mean(const ScalarField& phi) {
  return field_integral(phi) / phi.grid().domain_area();
}

double field_min(const ScalarField& phi) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : phi.data()) m = std::min(m, x);
  return m;
}

double field_max(const ScalarField& phi) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : phi.data()) m = std::max(m, x);
  return m;
}

double field_max_abs(const ScalarField& phi, double shift) {
  double m = 0.0;
  for (double x : phi.data()) m = std::max(m, std::abs(x - shift));
  return m;
}

bool field_all_finite(const ScalarField& phi) {
  for (double x : phi.data())
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace motsim
