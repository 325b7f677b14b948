#ifndef CURVLAB_CLI_HPP
#define CURVLAB_CLI_HPP

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvlab/comparison.hpp"
#include "curvlab/index.hpp"
#include "curvlab/index_scenarios.hpp"
#include "curvlab/lifting.hpp"
#include "curvlab/zoo.hpp"

namespace curvlab::cli {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Exit codes
// ---------------------------------------------------------------------------

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kUnknownName = 3,
  kBadParameter = 4,
  kDomainExit = 5,
  kUsage = 64,
};

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return kConfigError;
    case ErrorKind::unknown_name: return kUnknownName;
    case ErrorKind::domain:
    case ErrorKind::obstruction: return kDomainExit;
    default: return kBadParameter;
  }
}

// ---------------------------------------------------------------------------
// pi-expressions: numbers, pi, inf, + - * / ^, parentheses and a few functions
// ---------------------------------------------------------------------------

class ExprParser {
 public:
  explicit ExprParser(std::string s) : s_(std::move(s)) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + s_.substr(pos_) + "'");
    return v;
  }

 private:
  std::string s_;
  size_t pos_ = 0;

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::config, "bad expression \"" + s_ + "\": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }
  double term() {
    double v = unary();
    for (;;) {
      if (eat('*')) v *= unary();
      else if (eat('/')) v /= unary();
      else return v;
    }
  }
  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    const double base = primary();
    if (eat('^')) return std::pow(base, unary());
    return base;
  }
  double primary() {
    skip();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) error("missing ')'");
      return v;
    }
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) error("bad number");
      pos_ += static_cast<size_t>(end - begin);
      return v;
    }
    std::string id;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) id += s_[pos_++];
    if (id == "pi") return kPi;
    if (id == "inf") return std::numeric_limits<double>::infinity();
    static const std::map<std::string, double (*)(double)> fns = {
        {"sqrt", [](double x) { return std::sqrt(x); }}, {"sin", [](double x) { return std::sin(x); }},
        {"cos", [](double x) { return std::cos(x); }},   {"tan", [](double x) { return std::tan(x); }},
        {"atan", [](double x) { return std::atan(x); }}, {"asin", [](double x) { return std::asin(x); }},
        {"acos", [](double x) { return std::acos(x); }}};
    const auto it = fns.find(id);
    if (it == fns.end()) error(id.empty() ? "expected a value" : "unknown name '" + id + "'");
    if (!eat('(')) error("expected '(' after " + id);
    const double v = expr();
    if (!eat(')')) error("missing ')'");
    return it->second(v);
  }
};

inline double parse_expr(const std::string& s) { return ExprParser(s).parse(); }

// ---------------------------------------------------------------------------
// Config access with key validation
// ---------------------------------------------------------------------------

class Fields {
 public:
  Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorKind::config, where_ + ": expected an object");
  }

  void allow(const std::set<std::string>& keys) const {
    for (const auto& [k, v] : j_.items())
      if (!keys.count(k)) {
        std::string list;
        for (const auto& a : keys) list += (list.empty() ? "" : ", ") + a;
        fail(ErrorKind::config, where_ + ": unknown key '" + k + "' (allowed: " + list + ")");
      }
  }
  bool has(const std::string& k) const { return j_.contains(k); }
  const Json& raw(const std::string& k) const { return j_.at(k); }

  double num(const std::string& k) const {
    need(k);
    return to_num(j_.at(k), k);
  }
  double num(const std::string& k, double dflt) const { return has(k) ? num(k) : dflt; }
  int integer(const std::string& k, int dflt) const {
    if (!has(k)) return dflt;
    const Json& v = j_.at(k);
    if (!v.is_number_integer()) fail(ErrorKind::config, where_ + ": '" + k + "' must be an integer");
    return v.get<int>();
  }
  std::string str(const std::string& k) const {
    need(k);
    const Json& v = j_.at(k);
    if (!v.is_string()) fail(ErrorKind::config, where_ + ": '" + k + "' must be a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& k, const std::string& dflt) const { return has(k) ? str(k) : dflt; }
  bool boolean(const std::string& k, bool dflt) const {
    if (!has(k)) return dflt;
    if (!j_.at(k).is_boolean()) fail(ErrorKind::config, where_ + ": '" + k + "' must be true or false");
    return j_.at(k).get<bool>();
  }
  Vec vec(const std::string& k) const {
    need(k);
    const Json& v = j_.at(k);
    if (!v.is_array()) fail(ErrorKind::config, where_ + ": '" + k + "' must be an array");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = to_num(v[i], k);
    return out;
  }
  const std::string& where() const { return where_; }

  double to_num(const Json& v, const std::string& k) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_expr(v.get<std::string>());
    fail(ErrorKind::config, where_ + ": '" + k + "' must be a number or a pi-expression");
  }

 private:
  const Json& j_;
  std::string where_;

  void need(const std::string& k) const {
    if (!has(k)) fail(ErrorKind::config, where_ + ": missing key '" + k + "'");
  }
};

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// One computed quantity. Checks carry their own verdict; plain values are
/// compared against `expect` entries of the scenario when present.
struct Quantity {
  std::string name;
  double value = 0.0;
  bool is_bool = false;
  bool is_check = false;
  bool ok = true;
  bool applicable = true;
  double margin = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

struct Row {
  std::string scenario, op, quantity, paper;
  double computed = 0.0;
  double margin = std::numeric_limits<double>::quiet_NaN();
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  std::string status;  // pass | fail | info | inapplicable | error
};

struct TraceSample {
  std::string scenario;
  double t, lhs, rhs, margin;
  int dim_h;
};

struct ScenarioResult {
  std::string id, op, status, message;
  int error_code = 0;
  std::vector<Row> rows;
  Json details = Json::object();
  std::vector<TraceSample> trace;
};

inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s(buf);
  return s == "-0" ? "0" : s;
}

inline Json num_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return std::stod(fmt(v));
}

struct RunSettings {
  std::uint64_t seed = 20261016;
  double tol = 1e-4;  // default tolerance of `expect` entries
  int jobs = 1;
};

/// Seed of one scenario: the run seed mixed with the scenario id.
inline std::uint64_t scenario_seed(std::uint64_t seed, const std::string& id) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : id) h = (h ^ ch) * 1099511628211ull;
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  std::uint32_t out[2];
  sq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace curvlab::cli

#include "curvlab/cli_ops.hpp"

#endif  // CURVLAB_CLI_HPP
