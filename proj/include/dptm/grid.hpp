#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dptm {

/// Square n x n field of doubles stored row-major. Stands in for an image,
/// a diffusion latent and a pseudo-image alike (the encoder is the identity).
/// The side must be even and at least 2.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::size_t side, double fill = 0.0);
  Grid(std::size_t side, std::vector<double> values);

  std::size_t side() const { return side_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t row, std::size_t col) { return values_[row * side_ + col]; }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * side_ + col]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;

  Grid& operator+=(const Grid& other);
  Grid& operator-=(const Grid& other);
  Grid& operator*=(double scale);

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t side_ = 0;
  std::vector<double> values_;
};

Grid operator+(Grid lhs, const Grid& rhs);
Grid operator-(Grid lhs, const Grid& rhs);
Grid operator*(double scale, Grid g);

/// alpha * x + beta * y
Grid axpby(double alpha, const Grid& x, double beta, const Grid& y);

double dot(const Grid& a, const Grid& b);
double norm(const Grid& g);
double max_abs_diff(const Grid& a, const Grid& b);

/// Throws DimensionError naming `where` when the sides differ.
void require_same_side(const Grid& a, const Grid& b, std::string_view where);

}  // namespace dptm
