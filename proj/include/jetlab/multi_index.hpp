#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

namespace jetlab {

using MultiIndex = std::vector<int>;

int order(const MultiIndex& alpha);

// All exponent tuples of order <= r, graded by order and lex-descending inside
// each degree: (m=2, r=2) -> (0,0) (1,0) (0,1) (2,0) (1,1) (0,2).
std::vector<MultiIndex> enumerate_multiindices(int m, int r);

long binomial(int n, int k);
double factorial(int n);

// Shared indexing tables for one (m, r). Instances are interned, so two
// polynomials with the same shape point at the same Layout.
class Layout {
 public:
  struct Product {
    int lhs;
    int rhs;
    int out;
  };

  static std::shared_ptr<const Layout> get(int m, int r);

  int dim() const { return m_; }
  int order() const { return r_; }
  std::size_t size() const { return indices_.size(); }

  const MultiIndex& index(std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  int degree(std::size_t i) const { return degree_[i]; }
  // First slot of degree d; degree_begin(r + 1) == size().
  std::size_t degree_begin(int d) const { return degree_start_[d]; }

  // -1 when alpha has the wrong length or order > r.
  int find(const MultiIndex& alpha) const;
  // Index of alpha + e_var / alpha - e_var, or -1.
  int raise(std::size_t i, int var) const { return raise_[i * m_ + var]; }
  int lower(std::size_t i, int var) const { return lower_[i * m_ + var]; }

  // alpha! for slot i.
  double alpha_factorial(std::size_t i) const { return alpha_factorial_[i]; }

  // All (i, j, k) with index(i) + index(j) = index(k), order <= r, grouped by i.
  const std::vector<Product>& products() const { return products_; }
  std::size_t products_begin(std::size_t i) const { return product_start_[i]; }
  std::size_t products_end(std::size_t i) const { return product_start_[i + 1]; }

 private:
  Layout(int m, int r);
  std::uint64_t key(const MultiIndex& alpha) const;

  int m_;
  int r_;
  std::vector<MultiIndex> indices_;
  std::vector<int> degree_;
  std::vector<std::size_t> degree_start_;
  std::unordered_map<std::uint64_t, int> lookup_;
  std::vector<int> raise_;
  std::vector<int> lower_;
  std::vector<double> alpha_factorial_;
  std::vector<Product> products_;
  std::vector<std::size_t> product_start_;
};

using LayoutPtr = std::shared_ptr<const Layout>;

}  // namespace jetlab
