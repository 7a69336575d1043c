#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace czgrape::toml {

/// Scalar or flat array value of the TOML subset used by the config files:
/// integers, floats, booleans, double-quoted strings, and single-level
/// arrays of those.
struct Value {
  enum class Kind { integer, floating, boolean, string, array };
  Kind kind = Kind::integer;
  std::int64_t i = 0;
  double d = 0.0;
  bool b = false;
  std::string s;
  std::vector<Value> items;
  int line = 0;

  bool is_number() const {
    return kind == Kind::integer || kind == Kind::floating;
  }
  double number() const;

  static Value of_int(std::int64_t v);
  static Value of_float(double v);
  static Value of_bool(bool v);
  static Value of_string(std::string v);
  static Value of_array(std::vector<Value> v);
};

/// Parses a scalar or array literal (used by --set overrides). Unquoted text
/// that is not a number or boolean is taken as a string.
Value parse_scalar_lenient(const std::string& text);

/// Nested table of values. Accessors mark keys as consumed so a config
/// loader can reject unknown keys wholesale afterwards.
class Table {
 public:
  /// Strict parse; throws ConfigError with line numbers on malformed input.
  static Table parse(const std::string& text, const std::string& source_name);
  static Table parse_file(const std::string& path);

  /// Value lookup in this table (no dots). Marks the key consumed.
  const Value* find(const std::string& key) const;
  /// Child table lookup. Marks the section consumed (its keys still need
  /// their own lookups to count as consumed).
  const Table* child(const std::string& name) const;
  bool has_child(const std::string& name) const;

  /// Creates or replaces a value at a dotted path, creating intermediate
  /// tables as needed.
  void set(const std::string& dotted_path, Value v);

  /// Dotted paths of all keys and sections never touched by find()/child().
  std::vector<std::string> unconsumed() const;

  /// Round-trippable text form; keys and sections in sorted order.
  std::string serialize() const;

  bool empty() const { return values_.empty() && children_.empty(); }

 private:
  void collect_unconsumed(const std::string& prefix,
                          std::vector<std::string>& out) const;
  void serialize_into(const std::string& prefix, std::string& out) const;

  std::map<std::string, Value> values_;
  std::map<std::string, Table> children_;
  mutable std::set<std::string> consumed_values_;
  mutable std::set<std::string> consumed_children_;
};

/// Shortest decimal text that parses back to exactly x.
std::string format_double(double x);

}  // namespace czgrape::toml
