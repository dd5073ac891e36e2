#pragma once

// Truncated multivariate Taylor polynomials with complex coefficients.
// Coefficients are stored as c_a = f^(a)(x0) / a! over multi-indices a
// with |a| <= order, in graded lexicographic order.

#include <complex>
#include <memory>
#include <vector>

namespace gdef {

using cd = std::complex<double>;

class JetLayout {
 public:
  static std::shared_ptr<const JetLayout> get(int dims, int order);

  int dims() const { return dims_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(multi_.size()); }
  const std::vector<int>& multi(int k) const { return multi_[k]; }
  int degree(int k) const { return degree_[k]; }
  // Index of a multi-index, or -1 if its degree exceeds the order.
  int index_of(const std::vector<int>& a) const;
  // Number of coefficients of total degree <= d.
  int count_upto(int d) const { return count_upto_[d]; }

  struct Product {
    int i, j, k;
  };
  // Triples with multi(i) + multi(j) == multi(k), sorted by degree of k.
  const std::vector<Product>& products() const { return products_; }
  // products_end(d): one past the last triple whose result has degree <= d.
  int products_end(int d) const { return products_end_[d]; }

  // For derivative along r: out[k] = factor * in[src], src = index(a + e_r).
  struct Shift {
    int src;
    double factor;
  };
  const std::vector<Shift>& shift(int r) const { return shifts_[r]; }

 private:
  JetLayout(int dims, int order);
  int dims_, order_;
  std::vector<std::vector<int>> multi_;
  std::vector<int> degree_;
  std::vector<int> count_upto_;
  std::vector<Product> products_;
  std::vector<int> products_end_;
  std::vector<std::vector<Shift>> shifts_;
};

class Jet {
 public:
  Jet() = default;
  Jet(std::shared_ptr<const JetLayout> layout, cd value);
  static Jet variable(std::shared_ptr<const JetLayout> layout, int r, cd value);

  const std::shared_ptr<const JetLayout>& layout() const { return layout_; }
  int dims() const { return layout_->dims(); }
  // Highest total order whose coefficients are exact (drops under differentiation).
  int valid_order() const { return valid_; }

  cd value() const { return coef_[0]; }
  const std::vector<cd>& coefficients() const { return coef_; }
  cd coefficient(int k) const { return coef_[k]; }
  // Mixed partial derivative d^a f at the base point.
  cd partial(const std::vector<int>& a) const;
  cd d(int r) const;
  cd d(int r, int s) const;

  Jet derivative(int r) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(cd s);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, cd s) { return a *= s; }
  friend Jet operator*(cd s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, cd s) {
    a.coef_[0] += s;
    return a;
  }
  friend Jet operator-(Jet a, cd s) {
    a.coef_[0] -= s;
    return a;
  }
  friend Jet operator/(const Jet& a, const Jet& b);

  // Applies a univariate function given its Taylor coefficients t_k at value().
  Jet compose(const std::vector<cd>& taylor) const;

 private:
  std::shared_ptr<const JetLayout> layout_;
  int valid_ = 0;
  std::vector<cd> coef_;
};

Jet reciprocal(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet sinh(const Jet& x);
Jet cosh(const Jet& x);
Jet sqrt(const Jet& x);
Jet ipow(const Jet& x, long n);
Jet pow(const Jet& x, const Jet& y);

}  // namespace gdef
