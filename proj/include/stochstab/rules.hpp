#pragma once

// Closed-form generator rules for periodic fields on [0,1) and [0,1)^2.
//
// A rule is recorded on every field sampled from it so that refined grids,
// SDE coefficient evaluation and provenance all see the same function.

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace stochstab {

struct TrigTerm {
  int k = 1;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

/// Trigonometric polynomial a0 + sum(a_k cos 2pi k x + b_k sin 2pi k x), or the
/// reciprocal numerator / (that polynomial).
class Rule1D {
 public:
  enum class Kind { trig, reciprocal };

  static Rule1D constant(double c);
  /// a + b sin(2 pi k x)
  static Rule1D sine(double a, double b, int k = 1);
  /// a + b cos(2 pi k x)
  static Rule1D cosine(double a, double b, int k = 1);
  static Rule1D trig(double a0, std::vector<TrigTerm> terms);
  /// c / (a + b sin(2 pi k x))
  static Rule1D reciprocal_sine(double c, double a, double b, int k = 1);

  /// Parses "const:c", "sin:a,b[,k]", "cos:a,b[,k]", "recip-sin:c,a,b[,k]"
  /// and "trig:a0;k,a,b;k,a,b...". Throws ConfigError.
  static Rule1D parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }

  /// Same rule multiplied by s.
  Rule1D scaled(double s) const;

  template <typename Scalar>
  Scalar operator()(Scalar x) const {
    const Scalar poly = polynomial(x);
    return kind_ == Kind::trig ? poly : Scalar(numerator_) / poly;
  }

  template <typename Scalar>
  Scalar derivative(Scalar x) const {
    using std::cos;
    using std::sin;
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    Scalar dpoly(0);
    for (const auto& t : terms_) {
      const Scalar w = two_pi * Scalar(t.k);
      dpoly += w * (Scalar(t.sin_coeff) * cos(w * x) - Scalar(t.cos_coeff) * sin(w * x));
    }
    if (kind_ == Kind::trig) return dpoly;
    const Scalar poly = polynomial(x);
    return -Scalar(numerator_) * dpoly / (poly * poly);
  }

 private:
  Rule1D(Kind kind, double a0, std::vector<TrigTerm> terms, double numerator, std::string label)
      : kind_(kind), a0_(a0), terms_(std::move(terms)), numerator_(numerator), label_(std::move(label)) {}

  template <typename Scalar>
  Scalar polynomial(Scalar x) const {
    using std::cos;
    using std::sin;
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    Scalar v(a0_);
    for (const auto& t : terms_) {
      const Scalar w = two_pi * Scalar(t.k);
      v += Scalar(t.cos_coeff) * cos(w * x) + Scalar(t.sin_coeff) * sin(w * x);
    }
    return v;
  }

  Kind kind_;
  double a0_;
  std::vector<TrigTerm> terms_;
  double numerator_;
  std::string label_;
};

/// One separable term amp * f(2 pi kx x) * g(2 pi ky y), f and g each sin or cos.
struct TrigTerm2D {
  double amp = 0.0;
  int kx = 0;
  int ky = 0;
  bool sin_x = false;
  bool sin_y = false;
};

/// Sum of separable trigonometric terms on the 2-torus, with analytic partials.
class Rule2D {
 public:
  static Rule2D constant(double c);
  /// A sin(2 pi kx x) sin(2 pi ky y): the cellular stream function.
  static Rule2D sin_sin(double amp, int kx = 1, int ky = 1);
  /// a + b cos(2 pi k x)
  static Rule2D cos_x(double a, double b, int k = 1);
  static Rule2D terms(std::vector<TrigTerm2D> terms, std::string label);

  /// Parses "const:c", "sinsin:A[,kx,ky]", "cosx:a,b[,k]", "cosy:a,b[,k]".
  static Rule2D parse(std::string_view text);

  const std::string& label() const noexcept { return label_; }

  template <typename Scalar>
  Scalar operator()(Scalar x, Scalar y) const {
    return eval<Scalar>(x, y, 0, 0);
  }
  template <typename Scalar>
  Scalar dx(Scalar x, Scalar y) const {
    return eval<Scalar>(x, y, 1, 0);
  }
  template <typename Scalar>
  Scalar dy(Scalar x, Scalar y) const {
    return eval<Scalar>(x, y, 0, 1);
  }

 private:
  Rule2D(std::vector<TrigTerm2D> terms, std::string label)
      : terms_(std::move(terms)), label_(std::move(label)) {}

  // d-th derivative of sin or cos at angular frequency w.
  template <typename Scalar>
  static Scalar factor(bool is_sin, Scalar w, Scalar t, int d) {
    using std::cos;
    using std::sin;
    if (d == 0) return is_sin ? sin(w * t) : cos(w * t);
    return is_sin ? w * cos(w * t) : -w * sin(w * t);
  }

  template <typename Scalar>
  Scalar eval(Scalar x, Scalar y, int dxo, int dyo) const {
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    Scalar v(0);
    for (const auto& t : terms_) {
      const Scalar wx = two_pi * Scalar(t.kx);
      const Scalar wy = two_pi * Scalar(t.ky);
      v += Scalar(t.amp) * factor(t.sin_x, wx, x, dxo) * factor(t.sin_y, wy, y, dyo);
    }
    return v;
  }

  std::vector<TrigTerm2D> terms_;
  std::string label_;
};

}  // namespace stochstab
