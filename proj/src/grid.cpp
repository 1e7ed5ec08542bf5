#include "dptm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dptm/errors.hpp"

namespace dptm {

namespace {

void check_side(std::size_t side) {
  if (side < 2 || side % 2 != 0) {
    throw DimensionError("grid side must be even and >= 2, got " + std::to_string(side));
  }
}

}  // namespace

Grid::Grid(std::size_t side, double fill) : side_(side), values_(side * side, fill) {
  check_side(side);
}

Grid::Grid(std::size_t side, std::vector<double> values) : side_(side), values_(std::move(values)) {
  check_side(side);
  if (values_.size() != side * side) {
    throw DimensionError("grid of side " + std::to_string(side) + " needs " +
                         std::to_string(side * side) + " values, got " +
                         std::to_string(values_.size()));
  }
}

bool Grid::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Grid& Grid::operator+=(const Grid& other) {
  require_same_side(*this, other, "grid +=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

Grid& Grid::operator-=(const Grid& other) {
  require_same_side(*this, other, "grid -=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

Grid& Grid::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  return *this;
}

Grid operator+(Grid lhs, const Grid& rhs) { return lhs += rhs; }
Grid operator-(Grid lhs, const Grid& rhs) { return lhs -= rhs; }
Grid operator*(double scale, Grid g) { return g *= scale; }

Grid axpby(double alpha, const Grid& x, double beta, const Grid& y) {
  require_same_side(x, y, "axpby");
  Grid out(x.side());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = alpha * x[k] + beta * y[k];
  return out;
}

double dot(const Grid& a, const Grid& b) {
  require_same_side(a, b, "dot");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

double norm(const Grid& g) { return std::sqrt(dot(g, g)); }

double max_abs_diff(const Grid& a, const Grid& b) {
  require_same_side(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

void require_same_side(const Grid& a, const Grid& b, std::string_view where) {
  if (a.side() != b.side()) {
    throw DimensionError(std::string(where) + ": side mismatch " + std::to_string(a.side()) +
                         " vs " + std::to_string(b.side()));
  }
}

}  // namespace dptm
