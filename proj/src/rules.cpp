#include "stochstab/rules.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "stochstab/errors.hpp"

namespace stochstab {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, std::string_view context) {
  s = trim(s);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError("rule '" + std::string(context) + "': cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

int parse_int(std::string_view s, std::string_view context) {
  const double v = parse_double(s, context);
  if (v != std::floor(v) || v < 0 || v > 1e6) {
    throw ConfigError("rule '" + std::string(context) + "': expected a nonnegative integer, got '" +
                      std::string(trim(s)) + "'");
  }
  return static_cast<int>(v);
}

std::vector<double> parse_list(std::string_view s, std::string_view context) {
  std::vector<double> out;
  for (auto part : split(s, ',')) out.push_back(parse_double(part, context));
  return out;
}

void expect_arity(const std::vector<double>& p, std::size_t lo, std::size_t hi, std::string_view context) {
  if (p.size() < lo || p.size() > hi) {
    throw ConfigError("rule '" + std::string(context) + "': wrong number of parameters");
  }
}

int wavenumber_param(const std::vector<double>& p, std::size_t idx, std::string_view context) {
  if (p.size() <= idx) return 1;
  return parse_int(format_number(p[idx]), context);
}

}  // namespace

Rule1D Rule1D::constant(double c) {
  return Rule1D(Kind::trig, c, {}, 1.0, "const:" + format_number(c));
}

Rule1D Rule1D::sine(double a, double b, int k) {
  return Rule1D(Kind::trig, a, {TrigTerm{k, 0.0, b}}, 1.0,
                "sin:" + format_number(a) + "," + format_number(b) + "," + std::to_string(k));
}

Rule1D Rule1D::cosine(double a, double b, int k) {
  return Rule1D(Kind::trig, a, {TrigTerm{k, b, 0.0}}, 1.0,
                "cos:" + format_number(a) + "," + format_number(b) + "," + std::to_string(k));
}

Rule1D Rule1D::trig(double a0, std::vector<TrigTerm> terms) {
  std::string label = "trig:" + format_number(a0);
  for (const auto& t : terms) {
    label += ";" + std::to_string(t.k) + "," + format_number(t.cos_coeff) + "," + format_number(t.sin_coeff);
  }
  return Rule1D(Kind::trig, a0, std::move(terms), 1.0, std::move(label));
}

Rule1D Rule1D::reciprocal_sine(double c, double a, double b, int k) {
  return Rule1D(Kind::reciprocal, a, {TrigTerm{k, 0.0, b}}, c,
                "recip-sin:" + format_number(c) + "," + format_number(a) + "," + format_number(b) + "," +
                    std::to_string(k));
}

Rule1D Rule1D::scaled(double s) const {
  Rule1D out = *this;
  if (kind_ == Kind::reciprocal) {
    out.numerator_ *= s;
  } else {
    out.a0_ *= s;
    for (auto& t : out.terms_) {
      t.cos_coeff *= s;
      t.sin_coeff *= s;
    }
  }
  out.label_ = "scale:" + format_number(s) + "*(" + label_ + ")";
  return out;
}

Rule1D Rule1D::parse(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("rule '" + std::string(text) + "': expected '<kind>:<params>'");
  }
  const auto kind = trim(text.substr(0, colon));
  const auto body = text.substr(colon + 1);
  if (kind == "const") {
    const auto p = parse_list(body, text);
    expect_arity(p, 1, 1, text);
    return constant(p[0]);
  }
  if (kind == "sin" || kind == "cos") {
    const auto p = parse_list(body, text);
    expect_arity(p, 2, 3, text);
    const int k = wavenumber_param(p, 2, text);
    return kind == "sin" ? sine(p[0], p[1], k) : cosine(p[0], p[1], k);
  }
  if (kind == "recip-sin") {
    const auto p = parse_list(body, text);
    expect_arity(p, 3, 4, text);
    return reciprocal_sine(p[0], p[1], p[2], wavenumber_param(p, 3, text));
  }
  if (kind == "trig") {
    const auto groups = split(body, ';');
    const double a0 = parse_double(groups.front(), text);
    std::vector<TrigTerm> terms;
    for (std::size_t g = 1; g < groups.size(); ++g) {
      const auto p = parse_list(groups[g], text);
      expect_arity(p, 3, 3, text);
      terms.push_back(TrigTerm{parse_int(format_number(p[0]), text), p[1], p[2]});
    }
    return trig(a0, std::move(terms));
  }
  throw ConfigError("rule '" + std::string(text) + "': unknown kind '" + std::string(kind) + "'");
}

Rule2D Rule2D::constant(double c) {
  return Rule2D({TrigTerm2D{c, 0, 0, false, false}}, "const:" + format_number(c));
}

Rule2D Rule2D::sin_sin(double amp, int kx, int ky) {
  return Rule2D({TrigTerm2D{amp, kx, ky, true, true}},
                "sinsin:" + format_number(amp) + "," + std::to_string(kx) + "," + std::to_string(ky));
}

Rule2D Rule2D::cos_x(double a, double b, int k) {
  return Rule2D({TrigTerm2D{a, 0, 0, false, false}, TrigTerm2D{b, k, 0, false, false}},
                "cosx:" + format_number(a) + "," + format_number(b) + "," + std::to_string(k));
}

Rule2D Rule2D::terms(std::vector<TrigTerm2D> terms, std::string label) {
  return Rule2D(std::move(terms), std::move(label));
}

Rule2D Rule2D::parse(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("rule '" + std::string(text) + "': expected '<kind>:<params>'");
  }
  const auto kind = trim(text.substr(0, colon));
  const auto p = parse_list(text.substr(colon + 1), text);
  if (kind == "const") {
    expect_arity(p, 1, 1, text);
    return constant(p[0]);
  }
  if (kind == "sinsin") {
    expect_arity(p, 1, 3, text);
    const int kx = wavenumber_param(p, 1, text);
    const int ky = p.size() > 2 ? wavenumber_param(p, 2, text) : kx;
    return sin_sin(p[0], kx, ky);
  }
  if (kind == "cosx") {
    expect_arity(p, 2, 3, text);
    return cos_x(p[0], p[1], wavenumber_param(p, 2, text));
  }
  if (kind == "cosy") {
    expect_arity(p, 2, 3, text);
    const int k = wavenumber_param(p, 2, text);
    return Rule2D({TrigTerm2D{p[0], 0, 0, false, false}, TrigTerm2D{p[1], 0, k, false, false}},
                  "cosy:" + format_number(p[0]) + "," + format_number(p[1]) + "," + std::to_string(k));
  }
  throw ConfigError("rule '" + std::string(text) + "': unknown kind '" + std::string(kind) + "'");
}

}  // namespace stochstab
