#pragma once

// Invariant 1-forms and symmetric 2-tensors on the surface. Components are in
// the disk coordinates (dx, dy); every field evaluates to jets so consumers can
// differentiate. Fields are immutable handles over shared sources, and other
// modules can add new sources (e.g. the images of the magnetic potential).

#include <memory>
#include <utility>
#include <vector>

#include "maglab/jet.hpp"
#include "maglab/scalar_field.hpp"

namespace maglab {

struct CovectorJet {
  std::array<Jet, 2> c;

  Vec2 value() const { return {c[0].value(), c[1].value()}; }
  int order() const { return std::min(c[0].order(), c[1].order()); }
};

struct SymTensorJet {
  Jet xx, xy, yy;

  const Jet& at(int i, int j) const { return i == 0 ? (j == 0 ? xx : xy) : (j == 0 ? xy : yy); }
  Mat2 value() const {
    Mat2 m;
    m << xx.value(), xy.value(), xy.value(), yy.value();
    return m;
  }
  int order() const { return std::min({xx.order(), xy.order(), yy.order()}); }
};

class OneFormSource {
 public:
  virtual ~OneFormSource() = default;
  virtual CovectorJet jet(Point z, int order) const = 0;
  /// Coefficient of dx^dy in the exterior derivative.
  virtual Jet exterior_derivative(Point z, int order) const {
    const CovectorJet a = jet(z, order + 1);
    return a.c[1].partial(0) - a.c[0].partial(1);
  }
};

class SymTensorSource {
 public:
  virtual ~SymTensorSource() = default;
  virtual SymTensorJet jet(Point z, int order) const = 0;
};

struct UdvTerm {
  double coeff = 1.0;
  ScalarField u;
  ScalarField v;
};

namespace detail {

/// sum_i c_i u_i dv_i + d(phi).
class UdvForm final : public OneFormSource {
 public:
  UdvForm(std::vector<UdvTerm> terms, ScalarField exact) : terms_(std::move(terms)), exact_(std::move(exact)) {}

  CovectorJet jet(Point z, int order) const override {
    CovectorJet r{{Jet(0.0, order), Jet(0.0, order)}};
    for (const auto& t : terms_) {
      if (t.coeff == 0.0) continue;
      const Jet u = t.u.jet(z, order);
      const Jet v = t.v.jet(z, order + 1);
      r.c[0] += t.coeff * (u * v.partial(0));
      r.c[1] += t.coeff * (u * v.partial(1));
    }
    if (!exact_.is_constant()) {
      const Jet phi = exact_.jet(z, order + 1);
      r.c[0] += phi.partial(0);
      r.c[1] += phi.partial(1);
    }
    return r;
  }

  Jet exterior_derivative(Point z, int order) const override {
    Jet r(0.0, order);
    for (const auto& t : terms_) {
      if (t.coeff == 0.0) continue;
      const Jet u = t.u.jet(z, order + 1);
      const Jet v = t.v.jet(z, order + 1);
      r += t.coeff * (u.partial(0) * v.partial(1) - u.partial(1) * v.partial(0));
    }
    return r;
  }

  const std::vector<UdvTerm>& terms() const { return terms_; }
  const ScalarField& exact() const { return exact_; }

 private:
  std::vector<UdvTerm> terms_;
  ScalarField exact_;
};

}  // namespace detail

class OneFormField {
 public:
  OneFormField() = default;
  explicit OneFormField(std::shared_ptr<const OneFormSource> src) : src_(std::move(src)) {}

  static OneFormField udv(std::vector<UdvTerm> terms, ScalarField exact = {}) {
    return OneFormField(std::make_shared<const detail::UdvForm>(std::move(terms), std::move(exact)));
  }
  /// d(phi).
  static OneFormField exact(ScalarField phi) { return udv({}, std::move(phi)); }

  bool is_zero() const { return !src_; }

  CovectorJet jet(Point z, int order) const {
    if (!src_) return CovectorJet{{Jet(0.0, order), Jet(0.0, order)}};
    return src_->jet(z, order);
  }
  Vec2 value(Point z) const { return jet(z, 0).value(); }

  Jet exterior_derivative_jet(Point z, int order) const {
    if (!src_) return Jet(0.0, order);
    return src_->exterior_derivative(z, order);
  }
  double exterior_derivative(Point z) const { return exterior_derivative_jet(z, 0).value(); }

  /// Linear combination a * this + b * other.
  OneFormField combined(double a, const OneFormField& other, double b) const;

  OneFormField scaled(double s) const { return combined(s, OneFormField(), 0.0); }
  friend OneFormField operator+(const OneFormField& x, const OneFormField& y) { return x.combined(1.0, y, 1.0); }
  friend OneFormField operator-(const OneFormField& x, const OneFormField& y) { return x.combined(1.0, y, -1.0); }
  friend OneFormField operator*(double s, const OneFormField& x) { return x.scaled(s); }

  /// The form with its d(phi) part dropped when that part is known; other
  /// sources are returned unchanged.
  OneFormField without_exact_part() const {
    const auto* u = dynamic_cast<const detail::UdvForm*>(src_.get());
    if (!u) return *this;
    if (u->terms().empty()) return OneFormField();
    return udv(u->terms());
  }

  const std::shared_ptr<const OneFormSource>& source() const { return src_; }

 private:
  std::shared_ptr<const OneFormSource> src_;
};

namespace detail {

class SumForm final : public OneFormSource {
 public:
  SumForm(std::vector<std::pair<double, OneFormField>> terms) : terms_(std::move(terms)) {}

  CovectorJet jet(Point z, int order) const override {
    CovectorJet r{{Jet(0.0, order), Jet(0.0, order)}};
    for (const auto& [s, f] : terms_) {
      const CovectorJet a = f.jet(z, order);
      r.c[0] += s * a.c[0];
      r.c[1] += s * a.c[1];
    }
    return r;
  }
  Jet exterior_derivative(Point z, int order) const override {
    Jet r(0.0, order);
    for (const auto& [s, f] : terms_) r += s * f.exterior_derivative_jet(z, order);
    return r;
  }

 private:
  std::vector<std::pair<double, OneFormField>> terms_;
};

}  // namespace detail

inline OneFormField OneFormField::combined(double a, const OneFormField& other, double b) const {
  // u dv forms stay in closed form under linear combination.
  auto as_udv = [](const OneFormField& f) { return dynamic_cast<const detail::UdvForm*>(f.src_.get()); };
  const auto* x = as_udv(*this);
  const auto* y = as_udv(other);
  if ((x || is_zero()) && (y || other.is_zero())) {
    std::vector<UdvTerm> terms;
    ScalarField exact;
    if (x) {
      for (auto t : x->terms()) {
        t.coeff *= a;
        terms.push_back(std::move(t));
      }
      exact = exact + x->exact().scaled(a);
    }
    if (y) {
      for (auto t : y->terms()) {
        t.coeff *= b;
        terms.push_back(std::move(t));
      }
      exact = exact + y->exact().scaled(b);
    }
    if (terms.empty() && exact.is_constant()) return OneFormField();
    return udv(std::move(terms), std::move(exact));
  }
  std::vector<std::pair<double, OneFormField>> terms;
  if (!is_zero()) terms.emplace_back(a, *this);
  if (!other.is_zero()) terms.emplace_back(b, other);
  return OneFormField(std::make_shared<const detail::SumForm>(std::move(terms)));
}

class SymTensorField {
 public:
  SymTensorField() = default;
  explicit SymTensorField(std::shared_ptr<const SymTensorSource> src) : src_(std::move(src)) {}

  /// coeff * (du dv + dv du) / 2, invariant whenever u and v are.
  static SymTensorField sym_product(ScalarField u, ScalarField v, double coeff = 1.0);

  bool is_zero() const { return !src_; }
  SymTensorJet jet(Point z, int order) const {
    if (!src_) return SymTensorJet{Jet(0.0, order), Jet(0.0, order), Jet(0.0, order)};
    return src_->jet(z, order);
  }
  Mat2 value(Point z) const { return jet(z, 0).value(); }

  SymTensorField combined(double a, const SymTensorField& other, double b) const;
  SymTensorField scaled(double s) const { return combined(s, SymTensorField(), 0.0); }
  friend SymTensorField operator+(const SymTensorField& x, const SymTensorField& y) { return x.combined(1.0, y, 1.0); }
  friend SymTensorField operator*(double s, const SymTensorField& x) { return x.scaled(s); }

 private:
  std::shared_ptr<const SymTensorSource> src_;
};

namespace detail {

class SymProduct final : public SymTensorSource {
 public:
  SymProduct(ScalarField u, ScalarField v, double coeff) : u_(std::move(u)), v_(std::move(v)), coeff_(coeff) {}
  SymTensorJet jet(Point z, int order) const override {
    const Jet u = u_.jet(z, order + 1);
    const Jet v = v_.jet(z, order + 1);
    const Jet ux = u.partial(0), uy = u.partial(1), vx = v.partial(0), vy = v.partial(1);
    return {coeff_ * (ux * vx), (0.5 * coeff_) * (ux * vy + uy * vx), coeff_ * (uy * vy)};
  }

 private:
  ScalarField u_, v_;
  double coeff_;
};

class SumTensor final : public SymTensorSource {
 public:
  SumTensor(std::vector<std::pair<double, SymTensorField>> terms) : terms_(std::move(terms)) {}
  SymTensorJet jet(Point z, int order) const override {
    SymTensorJet r{Jet(0.0, order), Jet(0.0, order), Jet(0.0, order)};
    for (const auto& [s, f] : terms_) {
      const SymTensorJet p = f.jet(z, order);
      r.xx += s * p.xx;
      r.xy += s * p.xy;
      r.yy += s * p.yy;
    }
    return r;
  }

 private:
  std::vector<std::pair<double, SymTensorField>> terms_;
};

}  // namespace detail

inline SymTensorField SymTensorField::sym_product(ScalarField u, ScalarField v, double coeff) {
  return SymTensorField(std::make_shared<const detail::SymProduct>(std::move(u), std::move(v), coeff));
}

inline SymTensorField SymTensorField::combined(double a, const SymTensorField& other, double b) const {
  std::vector<std::pair<double, SymTensorField>> terms;
  if (!is_zero()) terms.emplace_back(a, *this);
  if (!other.is_zero()) terms.emplace_back(b, other);
  if (terms.empty()) return SymTensorField();
  return SymTensorField(std::make_shared<const detail::SumTensor>(std::move(terms)));
}

}  // namespace maglab
