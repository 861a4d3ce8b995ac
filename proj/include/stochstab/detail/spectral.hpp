#pragma once

// Discrete Fourier helpers for real samples on a uniform periodic grid.
// Coefficients are normalized so that f(x_j) = sum_k c_k exp(2 pi i k x_j).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <unsupported/Eigen/FFT>
#include <vector>

namespace stochstab::detail {

template <typename Scalar>
using Spectrum = std::vector<std::complex<Scalar>>;

/// Signed wavenumber of FFT slot i (the Nyquist slot maps to +n/2).
inline Eigen::Index wavenumber(Eigen::Index i, Eigen::Index n) noexcept { return i <= n / 2 ? i : i - n; }

template <typename Scalar>
Spectrum<Scalar> forward(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& samples) {
  const auto n = samples.size();
  std::vector<Scalar> in(samples.data(), samples.data() + n);
  Spectrum<Scalar> out;
  Eigen::FFT<Scalar> fft;
  fft.fwd(out, in);
  const Scalar scale = Scalar(1) / Scalar(n);
  for (auto& c : out) c *= scale;
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inverse(const Spectrum<Scalar>& coeffs) {
  const auto n = static_cast<Eigen::Index>(coeffs.size());
  Spectrum<Scalar> in(coeffs);
  for (auto& c : in) c *= Scalar(n);
  Spectrum<Scalar> out;
  Eigen::FFT<Scalar> fft;
  fft.inv(out, in);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(n);
  for (Eigen::Index j = 0; j < n; ++j) v[j] = out[static_cast<std::size_t>(j)].real();
  return v;
}

/// Multiplies by (2 pi i k)^order. Odd orders drop the Nyquist mode, whose
/// derivative is not representable as a real grid function.
template <typename Scalar>
void apply_derivative(Spectrum<Scalar>& c, int order) {
  const auto n = static_cast<Eigen::Index>(c.size());
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index k = wavenumber(i, n);
    if (order % 2 == 1 && 2 * k == n) {
      c[static_cast<std::size_t>(i)] = 0;
      continue;
    }
    std::complex<Scalar> factor(1);
    const std::complex<Scalar> ik(0, two_pi * Scalar(k));
    for (int p = 0; p < order; ++p) factor *= ik;
    c[static_cast<std::size_t>(i)] *= factor;
  }
}

/// Periodic antiderivative coefficients of the zero-mean part (mean slot zeroed,
/// Nyquist dropped).
template <typename Scalar>
Spectrum<Scalar> antiderivative_periodic_part(const Spectrum<Scalar>& c) {
  const auto n = static_cast<Eigen::Index>(c.size());
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Spectrum<Scalar> out(c.size());
  for (Eigen::Index i = 1; i < n; ++i) {
    const Eigen::Index k = wavenumber(i, n);
    if (2 * k == n) continue;
    out[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)] / std::complex<Scalar>(0, two_pi * Scalar(k));
  }
  return out;
}

/// Values of the trigonometric interpolant at the shifted grid x_j + theta / n.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> shifted_values(const Spectrum<Scalar>& c, Scalar theta) {
  const auto n = static_cast<Eigen::Index>(c.size());
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Spectrum<Scalar> s(c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index k = wavenumber(i, n);
    if (2 * k == n) {
      // symmetric Nyquist convention: c_N cos(pi n x)
      s[static_cast<std::size_t>(i)] *= std::cos(std::numbers::pi_v<Scalar> * theta);
    } else {
      s[static_cast<std::size_t>(i)] *= std::polar(Scalar(1), two_pi * Scalar(k) * theta / Scalar(n));
    }
  }
  return inverse(s);
}

/// Evaluates the trigonometric interpolant at an arbitrary point. O(n).
template <typename Scalar>
Scalar evaluate(const Spectrum<Scalar>& c, Scalar x) {
  const auto n = static_cast<Eigen::Index>(c.size());
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar v = c[0].real();
  for (Eigen::Index k = 1; k < n / 2; ++k) {
    const auto& ck = c[static_cast<std::size_t>(k)];
    const Scalar a = two_pi * Scalar(k) * x;
    v += Scalar(2) * (ck.real() * std::cos(a) - ck.imag() * std::sin(a));
  }
  v += c[static_cast<std::size_t>(n / 2)].real() * std::cos(std::numbers::pi_v<Scalar> * Scalar(n) * x);
  return v;
}

/// Zero-pads or truncates a spectrum to m slots, splitting or folding the Nyquist mode.
template <typename Scalar>
Spectrum<Scalar> resize(const Spectrum<Scalar>& c, Eigen::Index m) {
  const auto n = static_cast<Eigen::Index>(c.size());
  Spectrum<Scalar> out(static_cast<std::size_t>(m));
  const Eigen::Index half = std::min(n, m) / 2;
  auto slot = [](Eigen::Index k, Eigen::Index size) { return static_cast<std::size_t>(k >= 0 ? k : k + size); };
  for (Eigen::Index k = -half + 1; k < half; ++k) out[slot(k, m)] = c[slot(k, n)];
  if (m > n) {
    const auto nyq = c[static_cast<std::size_t>(n / 2)];
    out[slot(half, m)] = nyq / Scalar(2);
    out[slot(-half, m)] = nyq / Scalar(2);
  } else if (m < n) {
    out[slot(half, m)] = std::complex<Scalar>((c[slot(half, n)] + c[slot(-half, n)]).real(), 0);
  } else {
    out[slot(half, m)] = c[slot(half, n)];
  }
  return out;
}

}  // namespace stochstab::detail
