#include "idla/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "idla/random.hpp"

namespace idla {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::config, msg); }

struct Value {
  enum Kind { scalar, string, array } kind = scalar;
  std::string text;  // raw token for scalars, contents for strings
  std::vector<Value> items;
};

class ValueParser {
 public:
  explicit ValueParser(std::string_view s) : s_(s) {}

  Value parse_all() {
    Value v = parse();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    config_error(what + " in value '" + std::string(s_) + "'");
  }

  Value parse() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    Value v;
    const char c = s_[pos_];
    if (c == '[') {
      v.kind = Value::array;
      ++pos_;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      for (;;) {
        v.items.push_back(parse());
        skip_ws();
        if (pos_ >= s_.size()) fail("unterminated array");
        if (s_[pos_] == ',') {
          ++pos_;
          skip_ws();
          if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          return v;
        }
        fail("expected ',' or ']'");
      }
    }
    if (c == '"') {
      v.kind = Value::string;
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        v.text.push_back(s_[pos_++]);
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      return v;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && !std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    v.text = std::string(s_.substr(start, pos_ - start));
    if (v.text.empty()) fail("empty token");
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::int64_t as_int(const Value& v, std::string_view key) {
  if (v.kind != Value::scalar) config_error(std::string(key) + " expects an integer");
  std::int64_t out = 0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || p != e) config_error(std::string(key) + " expects an integer, got '" + v.text + "'");
  return out;
}

std::uint64_t as_uint(const Value& v, std::string_view key) {
  if (v.kind != Value::scalar) config_error(std::string(key) + " expects a non-negative integer");
  try {
    return parse_seed(v.text);
  } catch (const Error&) {
    config_error(std::string(key) + " expects a non-negative integer, got '" + v.text + "'");
  }
}

double as_double(const Value& v, std::string_view key) {
  if (v.kind != Value::scalar) config_error(std::string(key) + " expects a number");
  std::istringstream in(v.text);
  in.imbue(std::locale::classic());
  double out = 0.0;
  in >> out;
  if (in.fail() || !in.eof() || !std::isfinite(out)) {
    config_error(std::string(key) + " expects a number, got '" + v.text + "'");
  }
  return out;
}

std::string as_string(const Value& v, std::string_view key) {
  if (v.kind == Value::array) config_error(std::string(key) + " expects a string");
  return v.text;
}

Rational as_rational(const Value& v, std::string_view key) {
  if (v.kind == Value::array) config_error(std::string(key) + " expects a rational");
  try {
    return Rational::parse(v.text);
  } catch (const Error& e) {
    config_error(std::string(key) + ": " + e.what());
  }
}

template <class T, class F>
std::vector<T> as_list(const Value& v, std::string_view key, F elem) {
  if (v.kind != Value::array) config_error(std::string(key) + " expects an array");
  std::vector<T> out;
  for (const auto& item : v.items) out.push_back(elem(item, key));
  return out;
}

std::vector<std::vector<std::int64_t>> as_point_list(const Value& v, std::string_view key) {
  return as_list<std::vector<std::int64_t>>(v, key, [](const Value& item, std::string_view k) {
    return as_list<std::int64_t>(item, k, as_int);
  });
}

using Setter = std::function<void(Config&, const Value&, std::string_view)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"dim", [](Config& c, const Value& v, std::string_view k) { c.dim = static_cast<int>(as_int(v, k)); }},
      {"M", [](Config& c, const Value& v, std::string_view k) { c.M = as_int(v, k); }},
      {"M_prime", [](Config& c, const Value& v, std::string_view k) { c.M_prime = as_int(v, k); }},
      {"n", [](Config& c, const Value& v, std::string_view k) { c.n = as_double(v, k); }},
      {"seed", [](Config& c, const Value& v, std::string_view k) { c.seed = as_uint(v, k); }},
      {"seeds", [](Config& c, const Value& v, std::string_view k) { c.seeds = as_uint(v, k); }},
      {"threads",
       [](Config& c, const Value& v, std::string_view k) { c.threads = static_cast<unsigned>(as_uint(v, k)); }},
      {"step_budget", [](Config& c, const Value& v, std::string_view k) { c.step_budget = as_uint(v, k); }},
      {"out", [](Config& c, const Value& v, std::string_view k) { c.out = as_string(v, k); }},
      {"input", [](Config& c, const Value& v, std::string_view k) { c.input = as_string(v, k); }},
      {"mode", [](Config& c, const Value& v, std::string_view k) { c.mode = as_string(v, k); }},
      {"style", [](Config& c, const Value& v, std::string_view k) { c.style = as_string(v, k); }},
      {"K", [](Config& c, const Value& v, std::string_view k) { c.K = as_int(v, k); }},
      {"grid", [](Config& c, const Value& v, std::string_view k) { c.grid = as_list<std::int64_t>(v, k, as_int); }},
      {"windows",
       [](Config& c, const Value& v, std::string_view k) { c.windows = as_list<std::int64_t>(v, k, as_int); }},
      {"cone_eps", [](Config& c, const Value& v, std::string_view k) { c.cone_eps = as_rational(v, k); }},
      {"alpha", [](Config& c, const Value& v, std::string_view k) { c.alpha = as_rational(v, k); }},
      {"eps", [](Config& c, const Value& v, std::string_view k) { c.eps = as_double(v, k); }},
      {"eps_grid",
       [](Config& c, const Value& v, std::string_view k) { c.eps_grid = as_list<double>(v, k, as_double); }},
      {"M_grid",
       [](Config& c, const Value& v, std::string_view k) { c.M_grid = as_list<std::int64_t>(v, k, as_int); }},
      {"T", [](Config& c, const Value& v, std::string_view k) { c.T = as_double(v, k); }},
      {"M_ref", [](Config& c, const Value& v, std::string_view k) { c.M_ref = as_int(v, k); }},
      {"trials", [](Config& c, const Value& v, std::string_view k) { c.trials = as_uint(v, k); }},
      {"region", [](Config& c, const Value& v, std::string_view k) { c.region = as_int(v, k); }},
      {"K0", [](Config& c, const Value& v, std::string_view k) { c.K0 = as_int(v, k); }},
      {"target_level", [](Config& c, const Value& v, std::string_view k) { c.target_level = as_int(v, k); }},
      {"levels",
       [](Config& c, const Value& v, std::string_view k) { c.levels = as_list<std::int64_t>(v, k, as_int); }},
      {"walks", [](Config& c, const Value& v, std::string_view k) { c.walks = as_uint(v, k); }},
      {"shifts", [](Config& c, const Value& v, std::string_view k) { c.shifts = as_point_list(v, k); }},
      {"sites", [](Config& c, const Value& v, std::string_view k) { c.sites = as_point_list(v, k); }},
      {"coverage_radius", [](Config& c, const Value& v, std::string_view k) { c.coverage_radius = as_int(v, k); }},
      {"n_grid", [](Config& c, const Value& v, std::string_view k) { c.n_grid = as_list<double>(v, k, as_double); }},
      {"slack", [](Config& c, const Value& v, std::string_view k) { c.slack = as_double(v, k); }},
      {"significance", [](Config& c, const Value& v, std::string_view k) { c.significance = as_double(v, k); }},
      {"height", [](Config& c, const Value& v, std::string_view k) { c.height = as_int(v, k); }},
      {"records", [](Config& c, const Value& v, std::string_view k) { c.records = as_uint(v, k); }},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing '#' comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

}  // namespace

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : setters()) v.push_back(k);
    return v;
  }();
  return names;
}

void Config::set(std::string_view key, std::string_view value) {
  for (const auto& [k, setter] : setters()) {
    if (k == key) {
      setter(*this, ValueParser(value).parse_all(), key);
      return;
    }
  }
  config_error("unknown config key '" + std::string(key) + "'");
}

void Config::load_text(std::string_view text, const std::string& origin) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      config_error(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      config_error(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  load_text(buf.str(), path);
}

void Config::validate() const {
  if (dim < kMinDim || dim > kMaxDim) {
    throw Error(ErrorCode::unsupported_dimension, "dim must be between 2 and 4, got " + std::to_string(dim));
  }
  if (M < 0 || M_prime < 0) config_error("window radii must be non-negative");
  if (!(n >= 0.0)) config_error("n must be non-negative");
  if (seeds < 1) config_error("seeds must be at least 1");
  if (step_budget < 1) config_error("step_budget must be positive");
  if (mode != "time" && mode != "level") config_error("mode must be 'time' or 'level'");
  if (style != "forest" && style != "coupling") config_error("style must be 'forest' or 'coupling'");
  if (!(eps >= 0.0) || !(T > 0.0)) config_error("eps must be non-negative and T positive");
  if (!(significance > 0.0 && significance < 1.0)) config_error("significance must lie in (0,1)");
  for (const auto& s : shifts)
    if (static_cast<int>(s.size()) != dim) config_error("every shift needs dim coordinates");
  for (const auto& s : sites)
    if (static_cast<int>(s.size()) != dim) config_error("every site needs dim coordinates");
}

nlohmann::ordered_json Config::echo() const {
  nlohmann::ordered_json j;
  j["dim"] = dim;
  j["M"] = M;
  j["M_prime"] = M_prime;
  j["n"] = n;
  j["seed"] = seed;
  j["seeds"] = seeds;
  j["step_budget"] = step_budget;
  j["mode"] = mode;
  j["style"] = style;
  j["K"] = K;
  j["grid"] = grid;
  j["windows"] = windows;
  j["cone_eps"] = cone_eps.to_string();
  j["alpha"] = alpha.to_string();
  j["eps"] = eps;
  j["eps_grid"] = eps_grid;
  j["M_grid"] = M_grid;
  j["T"] = T;
  j["M_ref"] = M_ref;
  j["trials"] = trials;
  j["region"] = region;
  j["K0"] = K0;
  j["target_level"] = target_level;
  j["levels"] = levels;
  j["walks"] = walks;
  j["shifts"] = shifts;
  j["sites"] = sites;
  j["coverage_radius"] = coverage_radius;
  j["n_grid"] = n_grid;
  j["slack"] = slack;
  j["significance"] = significance;
  j["height"] = height;
  j["records"] = records;
  return j;
}

std::string Config::to_text() const {
  std::string out;
  const auto all = echo();
  for (const auto& [k, v] : all.items()) {
    out += k + " = ";
    if (v.is_string() && (k == "cone_eps" || k == "alpha")) out += v.get<std::string>();
    else out += v.dump();
    out += '\n';
  }
  return out;
}

}  // namespace idla
