#include "idla/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

namespace idla {

namespace {

Coord checked_coord(std::int64_t v) {
  if (v < std::numeric_limits<Coord>::min() || v > std::numeric_limits<Coord>::max()) {
    throw Error(ErrorCode::overflow, "coordinate " + std::to_string(v) + " does not fit in 32 bits");
  }
  return static_cast<Coord>(v);
}

Coord checked_add(Coord a, Coord b) {
  Coord out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(ErrorCode::overflow, "coordinate overflow");
  }
  return out;
}

}  // namespace

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::overflow: return "Overflow";
    case ErrorCode::step_budget_exceeded: return "StepBudgetExceeded";
    case ErrorCode::audit_violation: return "AuditViolation";
    case ErrorCode::io: return "IoError";
    case ErrorCode::schema_version_mismatch: return "SchemaVersionMismatch";
    case ErrorCode::checksum_mismatch: return "ChecksumMismatch";
    case ErrorCode::unsupported_dimension: return "UnsupportedDimension";
    case ErrorCode::snapshot_mismatch: return "SnapshotMismatch";
  }
  return "Unknown";
}

void check_dimension(int dim) {
  if (dim < kMinDim || dim > kMaxDim) {
    throw Error(ErrorCode::unsupported_dimension,
                "dimension must be in [2,4], got " + std::to_string(dim));
  }
}

Site::Site(int dim) : dim_(dim) { check_dimension(dim); }

Site::Site(std::initializer_list<std::int64_t> coords) : dim_(static_cast<int>(coords.size())) {
  check_dimension(dim_);
  int i = 0;
  for (auto v : coords) c_[static_cast<std::size_t>(i++)] = checked_coord(v);
}

Site Site::from_span(const std::int64_t* coords, int dim) {
  Site s(dim);
  for (int i = 0; i < dim; ++i) s[i] = checked_coord(coords[i]);
  return s;
}

Site Site::stepped(int dir) const {
  Site out = *this;
  const int axis = dir >> 1;
  out[axis] = checked_add(out[axis], (dir & 1) ? -1 : 1);
  return out;
}

std::string Site::to_string() const {
  std::string out = "(";
  for (int i = 0; i < dim_; ++i) {
    if (i) out += ',';
    out += std::to_string(c_[static_cast<std::size_t>(i)]);
  }
  return out + ")";
}

Source::Source(const Site& s) : site_(s) {
  if (s[0] != 0) {
    throw Error(ErrorCode::invalid_argument, "source " + s.to_string() + " is not on the hyperplane");
  }
}

Rational Rational::parse(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw Error(ErrorCode::invalid_argument, "cannot parse rational '" + std::string(text) + "'");
  };
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational p = parse(text.substr(0, slash));
    Rational q = parse(text.substr(slash + 1));
    if (q.num == 0) return fail();
    // (p.num/p.den) / (q.num/q.den)
    boost::multiprecision::cpp_int n = boost::multiprecision::cpp_int(p.num) * q.den;
    boost::multiprecision::cpp_int d = boost::multiprecision::cpp_int(p.den) * q.num;
    boost::multiprecision::cpp_int g = boost::multiprecision::gcd(n, d);
    n /= g;
    d /= g;
    if (n > std::numeric_limits<std::int64_t>::max() || d > std::numeric_limits<std::int64_t>::max()) return fail();
    return {static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
  }

  std::string mantissa(text);
  int exponent = 0;
  if (auto e = mantissa.find_first_of("eE"); e != std::string::npos) {
    try {
      exponent = std::stoi(mantissa.substr(e + 1));
    } catch (...) {
      return fail();
    }
    mantissa.resize(e);
  }
  if (!mantissa.empty() && mantissa.front() == '+') mantissa.erase(0, 1);
  if (mantissa.empty()) return fail();

  std::string digits;
  bool seen_dot = false;
  for (char ch : mantissa) {
    if (ch == '.') {
      if (seen_dot) return fail();
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits += ch;
      if (seen_dot) --exponent;
    } else {
      return fail();
    }
  }
  if (digits.empty()) return fail();
  // cpp_int reads a leading zero as an octal prefix.
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  if (digits.size() > 18) return fail();

  boost::multiprecision::cpp_int n(digits);
  boost::multiprecision::cpp_int d = 1;
  if (exponent > 18 || exponent < -18) return fail();
  for (int i = 0; i < exponent; ++i) n *= 10;
  for (int i = 0; i > exponent; --i) d *= 10;
  if (n == 0) return {0, 1};
  boost::multiprecision::cpp_int g = boost::multiprecision::gcd(n, d);
  n /= g;
  d /= g;
  if (n > std::numeric_limits<std::int64_t>::max() || d > std::numeric_limits<std::int64_t>::max()) return fail();
  return {static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
}

std::string Rational::to_string() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

ConeSpec::ConeSpec(Rational eps, Rational a) : epsilon(eps), alpha(a) {
  if (epsilon.num <= 0 || epsilon.den <= 0) {
    throw Error(ErrorCode::invalid_argument, "cone epsilon must be positive");
  }
  if (alpha.num <= 0 || alpha.den <= 0 || alpha.num >= alpha.den) {
    throw Error(ErrorCode::invalid_argument, "cone alpha must lie in (0,1)");
  }
  if (alpha.den > 10000) {
    throw Error(ErrorCode::invalid_argument, "cone alpha denominator must be at most 10^4");
  }
}

std::int64_t inf_norm(const Site& s) noexcept {
  std::int64_t m = 0;
  for (int i = 0; i < s.dim(); ++i) m = std::max<std::int64_t>(m, std::abs(static_cast<std::int64_t>(s[i])));
  return m;
}

Source project_to_hyperplane(const Site& s) noexcept {
  Site p = s;
  p[0] = 0;
  return Source(p);
}

bool in_strip(const Site& s, std::int64_t K) noexcept {
  for (int i = 1; i < s.dim(); ++i) {
    if (std::abs(static_cast<std::int64_t>(s[i])) > K) return false;
  }
  return true;
}

std::int64_t hyperplane_distance(const Site& a, const Site& b) noexcept {
  std::int64_t m = 0;
  for (int i = 1; i < a.dim(); ++i) {
    m = std::max<std::int64_t>(m, std::abs(static_cast<std::int64_t>(a[i]) - b[i]));
  }
  return m;
}

bool hball_overlap(const Source& z1, std::int64_t r1, const Source& z2, std::int64_t r2) {
  if (r1 < 0 || r2 < 0) throw Error(ErrorCode::invalid_argument, "ball radius must be non-negative");
  return hyperplane_distance(z1.site(), z2.site()) <= r1 + r2;
}

bool cone_contains(const Site& s, const ConeSpec& cone) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::pow;
  const std::int64_t first = std::abs(static_cast<std::int64_t>(s[0]));
  if (first == 0) return true;
  const std::int64_t level = ConeTable::hyperplane_level(s);
  const auto p = static_cast<unsigned>(cone.alpha.num);
  const auto q = static_cast<unsigned>(cone.alpha.den);
  // |s_1| <= (a/b) l^(p/q)  <=>  |s_1|^q b^q <= a^q l^p
  cpp_int lhs = pow(cpp_int(first), q) * pow(cpp_int(cone.epsilon.den), q);
  cpp_int rhs = pow(cpp_int(cone.epsilon.num), q) * pow(cpp_int(level), p);
  return lhs <= rhs;
}

Site translate(const Site& s, const Source& k) {
  if (s.dim() != k.dim()) throw Error(ErrorCode::invalid_argument, "dimension mismatch in translate");
  Site out = s;
  for (int i = 0; i < s.dim(); ++i) out[i] = checked_add(s[i], k[i]);
  return out;
}

Site negate(const Source& k) {
  Site out(k.dim());
  for (int i = 0; i < k.dim(); ++i) out[i] = checked_coord(-static_cast<std::int64_t>(k[i]));
  return out;
}

std::int64_t ConeTable::hyperplane_level(const Site& s) noexcept {
  std::int64_t m = 0;
  for (int i = 1; i < s.dim(); ++i) m = std::max<std::int64_t>(m, std::abs(static_cast<std::int64_t>(s[i])));
  return m;
}

std::int64_t ConeTable::max_first_coord(std::int64_t level) {
  if (level < 0) level = -level;
  if (static_cast<std::size_t>(level) < cache_.size()) return cache_[static_cast<std::size_t>(level)];
  const std::size_t want = static_cast<std::size_t>(level) + 1;
  const std::size_t start = cache_.size();
  cache_.resize(std::max(want, start * 2));
  for (std::size_t l = start; l < cache_.size(); ++l) {
    Site probe(2);
    probe[1] = static_cast<Coord>(l);
    double guess = cone_.epsilon.to_double() * std::pow(static_cast<double>(l), cone_.alpha.to_double());
    auto h = static_cast<std::int64_t>(std::floor(guess));
    h = std::clamp<std::int64_t>(h, 0, std::numeric_limits<Coord>::max() - 1);
    probe[0] = static_cast<Coord>(h);
    while (h > 0 && !cone_contains(probe, cone_)) probe[0] = static_cast<Coord>(--h);
    for (;;) {
      probe[0] = static_cast<Coord>(h + 1);
      if (h + 1 >= std::numeric_limits<Coord>::max() || !cone_contains(probe, cone_)) break;
      ++h;
    }
    cache_[l] = h;
  }
  return cache_[static_cast<std::size_t>(level)];
}

bool SourceBox::contains(const Source& z) const noexcept {
  return hyperplane_distance(z.site(), center.site()) <= radius;
}

std::size_t SourceBox::size() const {
  std::size_t side = static_cast<std::size_t>(2 * radius + 1);
  std::size_t n = 1;
  for (int i = 1; i < center.dim(); ++i) n *= side;
  return n;
}

std::vector<Source> SourceBox::enumerate() const {
  const int dim = center.dim();
  std::vector<Source> out;
  out.reserve(size());
  Site cur = center.site();
  for (int i = 1; i < dim; ++i) cur[i] = static_cast<Coord>(center[i] - radius);
  for (;;) {
    out.emplace_back(cur);
    int axis = dim - 1;
    while (axis >= 1) {
      if (cur[axis] < center[axis] + radius) {
        ++cur[axis];
        break;
      }
      cur[axis] = static_cast<Coord>(center[axis] - radius);
      --axis;
    }
    if (axis < 1) break;
  }
  return out;
}

std::vector<Source> SourceBox::enumerate_by_level() const {
  auto all = enumerate();
  std::stable_sort(all.begin(), all.end(), [&](const Source& a, const Source& b) {
    return hyperplane_distance(a.site(), center.site()) < hyperplane_distance(b.site(), center.site());
  });
  return all;
}

std::int64_t hyperplane_sphere_size(int dim, std::int64_t r) {
  check_dimension(dim);
  if (r < 0) return 0;
  auto ipow = [](std::int64_t b, int e) {
    std::int64_t v = 1;
    for (int i = 0; i < e; ++i) v *= b;
    return v;
  };
  if (r == 0) return 1;
  return ipow(2 * r + 1, dim - 1) - ipow(2 * r - 1, dim - 1);
}

}  // namespace idla
