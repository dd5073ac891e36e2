#include "gdef/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "gdef/errors.hpp"

namespace gdef {

namespace {

void enumerate(int dims, int degree, int pos, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (pos == dims - 1) {
    cur[pos] = degree;
    out.push_back(cur);
    return;
  }
  for (int a = degree; a >= 0; --a) {
    cur[pos] = a;
    enumerate(dims, degree - a, pos + 1, cur, out);
  }
}

double factorial_of(const std::vector<int>& a) {
  double f = 1.0;
  for (int v : a)
    for (int t = 2; t <= v; ++t) f *= t;
  return f;
}

}  // namespace

JetLayout::JetLayout(int dims, int order) : dims_(dims), order_(order) {
  for (int d = 0; d <= order; ++d) {
    if (dims == 0) {
      if (d == 0) multi_.push_back({});
    } else {
      std::vector<int> cur(dims, 0);
      enumerate(dims, d, 0, cur, multi_);
    }
    count_upto_.push_back(static_cast<int>(multi_.size()));
  }
  for (auto& a : multi_) {
    int s = 0;
    for (int v : a) s += v;
    degree_.push_back(s);
  }
  const int n = size();
  for (int k = 0; k < n; ++k) {
    // all splits multi(k) = multi(i) + multi(j)
    for (int i = 0; i < count_upto_[degree_[k]]; ++i) {
      std::vector<int> rest(dims);
      bool ok = true;
      for (int r = 0; r < dims; ++r) {
        rest[r] = multi_[k][r] - multi_[i][r];
        if (rest[r] < 0) {
          ok = false;
          break;
        }
      }
      if (ok) products_.push_back({i, index_of(rest), k});
    }
  }
  products_end_.assign(order + 1, 0);
  for (int d = 0, pos = 0; d <= order; ++d) {
    while (pos < static_cast<int>(products_.size()) && degree_[products_[pos].k] <= d) ++pos;
    products_end_[d] = pos;
  }
  shifts_.resize(dims);
  for (int r = 0; r < dims; ++r) {
    for (int k = 0; k < n; ++k) {
      std::vector<int> up = multi_[k];
      up[r] += 1;
      const int src = index_of(up);
      shifts_[r].push_back({src, static_cast<double>(up[r])});
    }
  }
}

int JetLayout::index_of(const std::vector<int>& a) const {
  int deg = 0;
  for (int v : a) deg += v;
  if (deg > order_) return -1;
  const int begin = deg == 0 ? 0 : count_upto_[deg - 1];
  for (int k = begin; k < count_upto_[deg]; ++k)
    if (multi_[k] == a) return k;
  return -1;
}

std::shared_ptr<const JetLayout> JetLayout::get(int dims, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dims, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const JetLayout> layout(new JetLayout(dims, order));
  cache.emplace(key, layout);
  return layout;
}

Jet::Jet(std::shared_ptr<const JetLayout> layout, cd value)
    : layout_(std::move(layout)), valid_(layout_->order()), coef_(layout_->size(), cd(0.0)) {
  coef_[0] = value;
}

Jet Jet::variable(std::shared_ptr<const JetLayout> layout, int r, cd value) {
  Jet j(layout, value);
  if (layout->order() >= 1) {
    std::vector<int> a(layout->dims(), 0);
    a[r] = 1;
    j.coef_[layout->index_of(a)] = 1.0;
  }
  return j;
}

cd Jet::partial(const std::vector<int>& a) const {
  const int k = layout_->index_of(a);
  if (k < 0 || layout_->degree(k) > valid_)
    throw JetOrderTooLow("requested derivative exceeds the jet order");
  return coef_[k] * factorial_of(a);
}

cd Jet::d(int r) const {
  std::vector<int> a(dims(), 0);
  a[r] = 1;
  return partial(a);
}

cd Jet::d(int r, int s) const {
  std::vector<int> a(dims(), 0);
  a[r] += 1;
  a[s] += 1;
  return partial(a);
}

Jet Jet::derivative(int r) const {
  if (valid_ < 1) throw JetOrderTooLow("cannot differentiate an order-0 jet");
  Jet out(layout_, 0.0);
  out.valid_ = valid_ - 1;
  const auto& sh = layout_->shift(r);
  const int n = layout_->count_upto(out.valid_);
  for (int k = 0; k < n; ++k) out.coef_[k] = sh[k].factor * coef_[sh[k].src];
  return out;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (auto& c : out.coef_) c = -c;
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  valid_ = std::min(valid_, o.valid_);
  for (std::size_t k = 0; k < coef_.size(); ++k) coef_[k] += o.coef_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  valid_ = std::min(valid_, o.valid_);
  for (std::size_t k = 0; k < coef_.size(); ++k) coef_[k] -= o.coef_[k];
  return *this;
}

Jet& Jet::operator*=(cd s) {
  for (auto& c : coef_) c *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet out(a.layout_, 0.0);
  out.valid_ = std::min(a.valid_, b.valid_);
  const auto& prods = a.layout_->products();
  const int end = a.layout_->products_end(out.valid_);
  for (int t = 0; t < end; ++t) {
    const auto& p = prods[t];
    out.coef_[p.k] += a.coef_[p.i] * b.coef_[p.j];
  }
  return out;
}

Jet Jet::compose(const std::vector<cd>& taylor) const {
  // f(x0 + delta) = sum_k t_k delta^k; delta is nilpotent of index valid+1.
  Jet delta = *this;
  delta.coef_[0] = 0.0;
  Jet out(layout_, taylor[0]);
  out.valid_ = valid_;
  Jet power = delta;
  for (int k = 1; k <= valid_ && k < static_cast<int>(taylor.size()); ++k) {
    if (k > 1) power = power * delta;
    for (std::size_t c = 0; c < coef_.size(); ++c) out.coef_[c] += taylor[k] * power.coef_[c];
  }
  return out;
}

Jet reciprocal(const Jet& x) {
  const cd a = x.value();
  if (a == cd(0.0)) throw DivisionByZero("denominator vanishes at the base point");
  std::vector<cd> t(x.valid_order() + 1);
  cd inv = 1.0 / a, p = inv;
  for (std::size_t k = 0; k < t.size(); ++k) {
    t[k] = (k % 2 == 0 ? 1.0 : -1.0) * p;
    p *= inv;
  }
  return x.compose(t);
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet exp(const Jet& x) {
  std::vector<cd> t(x.valid_order() + 1);
  cd e = std::exp(x.value());
  double fact = 1.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    t[k] = e / fact;
  }
  return x.compose(t);
}

namespace {
void check_branch(cd a, const char* name) {
  if (a == cd(0.0)) throw DomainError(std::string(name) + " at zero");
  if (a.imag() == 0.0 && a.real() < 0.0)
    throw DomainError(std::string(name) + " on the negative real axis");
}
}  // namespace

Jet log(const Jet& x) {
  const cd a = x.value();
  check_branch(a, "log");
  std::vector<cd> t(x.valid_order() + 1);
  t[0] = std::log(a);
  cd inv = 1.0 / a, p = inv;
  for (std::size_t k = 1; k < t.size(); ++k) {
    t[k] = (k % 2 == 1 ? 1.0 : -1.0) * p / static_cast<double>(k);
    p *= inv;
  }
  return x.compose(t);
}

Jet sqrt(const Jet& x) {
  const cd a = x.value();
  if (a == cd(0.0) && x.valid_order() == 0) return Jet(x.layout(), 0.0);
  check_branch(a, "sqrt");
  std::vector<cd> t(x.valid_order() + 1);
  const cd root = std::sqrt(a);
  cd binom = 1.0, p = root;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) {
      binom *= (0.5 - static_cast<double>(k - 1)) / static_cast<double>(k);
      p /= a;
    }
    t[k] = binom * p;
  }
  return x.compose(t);
}

namespace {
// Taylor coefficients of sin/cos/sinh/cosh at a.
Jet trig(const Jet& x, bool hyperbolic, bool start_with_sin) {
  const cd a = x.value();
  cd s = hyperbolic ? std::sinh(a) : std::sin(a);
  cd c = hyperbolic ? std::cosh(a) : std::cos(a);
  // derivative cycle: sin -> cos -> -sin -> -cos (hyperbolic: sinh -> cosh -> sinh)
  std::vector<cd> cycle = hyperbolic ? std::vector<cd>{s, c, s, c} : std::vector<cd>{s, c, -s, -c};
  if (!start_with_sin) cycle = hyperbolic ? std::vector<cd>{c, s, c, s} : std::vector<cd>{c, -s, -c, s};
  std::vector<cd> t(x.valid_order() + 1);
  double fact = 1.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    t[k] = cycle[k % 4] / fact;
  }
  return x.compose(t);
}
}  // namespace

Jet sin(const Jet& x) { return trig(x, false, true); }
Jet cos(const Jet& x) { return trig(x, false, false); }
Jet sinh(const Jet& x) { return trig(x, true, true); }
Jet cosh(const Jet& x) { return trig(x, true, false); }

Jet ipow(const Jet& x, long n) {
  if (n < 0) return reciprocal(ipow(x, -n));
  Jet result(x.layout(), 1.0);
  Jet base = x;
  bool first = true;
  while (n > 0) {
    if (n & 1) {
      result = first ? base : result * base;
      first = false;
    }
    n >>= 1;
    if (n > 0) base = base * base;
  }
  if (first) {
    // x^0 keeps the validity of x
    Jet one = x * 0.0;
    return one + cd(1.0);
  }
  return result;
}

Jet pow(const Jet& x, const Jet& y) {
  // principal branch: exp(y log x)
  const cd a = x.value();
  if (a == cd(0.0)) throw DomainError("non-integer power of zero");
  std::vector<cd> t(x.valid_order() + 1);
  t[0] = std::log(a);
  cd inv = 1.0 / a, p = inv;
  for (std::size_t k = 1; k < t.size(); ++k) {
    t[k] = (k % 2 == 1 ? 1.0 : -1.0) * p / static_cast<double>(k);
    p *= inv;
  }
  return exp(y * x.compose(t));
}

}  // namespace gdef
