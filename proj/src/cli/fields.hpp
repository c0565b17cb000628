#pragma once

// Strict reader over one JSON object: every accessor marks its key as known,
// and finish() reports the rest as unknown. Type and range problems are
// appended to the shared diagnostics list instead of thrown.

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trapping/cli/config.hpp"
#include "trapping/io.hpp"

namespace trapping::cli {

class Fields {
 public:
  Fields(const Json* obj, std::string prefix, Diagnostics& diags) : prefix_(std::move(prefix)), diags_(diags) {
    if (obj == nullptr || obj->is_null()) return;
    if (!obj->is_object()) {
      diags_.push_back(prefix_ + " must be an object");
      return;
    }
    obj_ = obj;
  }
  Fields(const Fields&) = delete;
  Fields& operator=(const Fields&) = delete;
  ~Fields() { finish(); }

  std::string path(std::string_view key) const { return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key); }
  bool has(std::string_view key) const { return obj_ != nullptr && obj_->contains(std::string(key)); }
  Diagnostics& diagnostics() { return diags_; }
  void note(std::string_view key) { known_.insert(std::string(key)); }
  void error(std::string msg) { diags_.push_back(std::move(msg)); }

  std::optional<double> number(std::string_view key) {
    const Json* v = raw(key);
    if (v == nullptr) return std::nullopt;
    if (v->is_number()) return v->get<double>();
    if (v->is_string()) {
      const auto s = v->get<std::string>();
      if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    error(path(key) + " must be a number (or \"inf\")");
    return std::nullopt;
  }
  double number(std::string_view key, double fallback) { return number(key).value_or(fallback); }
  std::optional<double> required_number(std::string_view key) {
    if (!has(key)) missing(key);
    return number(key);
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const Json* v = raw(key);
    if (v == nullptr) return std::nullopt;
    if (v->is_number_integer()) return v->get<std::int64_t>();
    if (v->is_number_float()) {
      const double x = v->get<double>();
      if (std::floor(x) == x && std::abs(x) < 9e15) return static_cast<std::int64_t>(x);
    }
    error(path(key) + " must be an integer");
    return std::nullopt;
  }
  int integer(std::string_view key, int fallback) {
    const auto v = integer(key);
    if (!v) return fallback;
    if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
      error(path(key) + " is out of the integer range");
      return fallback;
    }
    return static_cast<int>(*v);
  }
  std::optional<int> required_integer(std::string_view key) {
    if (!has(key)) {
      missing(key);
      note(key);
      return std::nullopt;
    }
    return integer(key, 0);
  }
  std::uint64_t count(std::string_view key, std::uint64_t fallback) {
    const Json* v = raw(key);
    if (v == nullptr) return fallback;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v->get<std::int64_t>());
    error(path(key) + " must be a nonnegative integer");
    return fallback;
  }

  bool flag(std::string_view key, bool fallback) {
    const Json* v = raw(key);
    if (v == nullptr) return fallback;
    if (v->is_boolean()) return v->get<bool>();
    error(path(key) + " must be true or false");
    return fallback;
  }

  std::optional<std::string> text(std::string_view key) {
    const Json* v = raw(key);
    if (v == nullptr) return std::nullopt;
    if (v->is_string()) return v->get<std::string>();
    error(path(key) + " must be a string");
    return std::nullopt;
  }
  std::string text(std::string_view key, std::string fallback) { return text(key).value_or(std::move(fallback)); }
  std::optional<std::string> required_text(std::string_view key) {
    if (!has(key)) missing(key);
    return text(key);
  }

  std::optional<std::vector<double>> numbers(std::string_view key) {
    const Json* v = raw(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_array()) {
      error(path(key) + " must be an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) {
        error(path(key) + " must be an array of numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::optional<std::vector<int>> integers(std::string_view key) {
    const Json* v = raw(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_array()) {
      error(path(key) + " must be an array of integers");
      return std::nullopt;
    }
    std::vector<int> out;
    for (const auto& e : *v) {
      if (!e.is_number_integer()) {
        error(path(key) + " must be an array of integers");
        return std::nullopt;
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  const Json* object(std::string_view key) {
    const Json* v = raw(key);
    if (v != nullptr && !v->is_object()) {
      error(path(key) + " must be an object");
      return nullptr;
    }
    return v;
  }
  const Json* array(std::string_view key) {
    const Json* v = raw(key);
    if (v != nullptr && !v->is_array()) {
      error(path(key) + " must be an array");
      return nullptr;
    }
    return v;
  }

  void missing(std::string_view key) { error("missing required key '" + path(key) + "'"); }

  /// Range rule; `rule` reads like "must be positive" or "is outside [0, 1]".
  void check(bool ok, std::string_view key, double value, std::string_view rule) {
    if (!ok) error(path(key) + " = " + format_double(value) + " " + std::string(rule));
  }

  void finish() {
    if (finished_ || obj_ == nullptr) {
      finished_ = true;
      return;
    }
    finished_ = true;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!known_.count(it.key())) error("unknown key '" + path(it.key()) + "'");
    }
  }

 private:
  const Json* raw(std::string_view key) {
    note(key);
    if (!has(key)) return nullptr;
    return &obj_->at(std::string(key));
  }

  const Json* obj_ = nullptr;
  std::string prefix_;
  Diagnostics& diags_;
  std::set<std::string> known_;
  bool finished_ = false;
};

}  // namespace trapping::cli
