#include "czgrape/toml_lite.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "czgrape/errors.hpp"

namespace czgrape::toml {

namespace {

[[noreturn]] void fail(const std::string& source, int line,
                       const std::string& what) {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Cuts an inline comment, honoring double-quoted strings.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

bool valid_key(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

bool parse_integer(const std::string& t, std::int64_t& out) {
  if (t.empty()) return false;
  size_t i = (t[0] == '+' || t[0] == '-') ? 1 : 0;
  if (i == t.size()) return false;
  for (size_t j = i; j < t.size(); ++j)
    if (!std::isdigit(static_cast<unsigned char>(t[j]))) return false;
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(t.c_str(), &end, 10);
  if (errno != 0 || end != t.c_str() + t.size()) return false;
  out = v;
  return true;
}

bool parse_float(const std::string& t, double& out) {
  if (t.empty()) return false;
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

std::string parse_string_literal(const std::string& t, const std::string& src,
                                 int line) {
  if (t.size() < 2 || t.front() != '"' || t.back() != '"')
    fail(src, line, "malformed string literal: " + t);
  std::string out;
  for (size_t i = 1; i + 1 < t.size(); ++i) {
    char c = t[i];
    if (c == '\\') {
      if (i + 2 >= t.size()) fail(src, line, "dangling escape in string");
      char n = t[++i];
      if (n == '"') out += '"';
      else if (n == '\\') out += '\\';
      else if (n == 't') out += '\t';
      else if (n == 'n') out += '\n';
      else fail(src, line, std::string("unsupported escape \\") + n);
    } else if (c == '"') {
      fail(src, line, "unescaped quote inside string");
    } else {
      out += c;
    }
  }
  return out;
}

// Splits an array body on top-level commas (strings may contain commas).
std::vector<std::string> split_array_items(const std::string& body,
                                           const std::string& src, int line) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  for (size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (in_string) {
      cur += c;
      if (c == '\\' && i + 1 < body.size()) cur += body[++i];
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
      cur += c;
    } else if (c == '[') {
      fail(src, line, "nested arrays are not supported");
    } else if (c == ',') {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_string) fail(src, line, "unterminated string in array");
  if (!trim(cur).empty()) items.push_back(cur);
  else if (!items.empty() && trim(cur).empty() && !cur.empty()) {
    // trailing comma allowed
  }
  return items;
}

Value parse_value(const std::string& raw, const std::string& src, int line);

Value parse_array(const std::string& t, const std::string& src, int line) {
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    fail(src, line, "malformed array literal");
  std::string body = t.substr(1, t.size() - 2);
  Value v;
  v.kind = Value::Kind::array;
  v.line = line;
  if (trim(body).empty()) return v;
  for (const auto& item : split_array_items(body, src, line)) {
    std::string it = trim(item);
    if (it.empty()) fail(src, line, "empty array element");
    v.items.push_back(parse_value(it, src, line));
  }
  return v;
}

Value parse_value(const std::string& raw, const std::string& src, int line) {
  std::string t = trim(raw);
  if (t.empty()) fail(src, line, "missing value");
  Value v;
  v.line = line;
  if (t.front() == '"') {
    v.kind = Value::Kind::string;
    v.s = parse_string_literal(t, src, line);
    return v;
  }
  if (t.front() == '[') return parse_array(t, src, line);
  if (t == "true" || t == "false") {
    v.kind = Value::Kind::boolean;
    v.b = (t == "true");
    return v;
  }
  if (parse_integer(t, v.i)) {
    v.kind = Value::Kind::integer;
    return v;
  }
  if (parse_float(t, v.d)) {
    v.kind = Value::Kind::floating;
    return v;
  }
  fail(src, line, "cannot parse value: " + t);
}

}  // namespace

double Value::number() const {
  if (kind == Kind::integer) return static_cast<double>(i);
  if (kind == Kind::floating) return d;
  throw ConfigError("value is not a number");
}

Value Value::of_int(std::int64_t v) {
  Value x;
  x.kind = Kind::integer;
  x.i = v;
  return x;
}
Value Value::of_float(double v) {
  Value x;
  x.kind = Kind::floating;
  x.d = v;
  return x;
}
Value Value::of_bool(bool v) {
  Value x;
  x.kind = Kind::boolean;
  x.b = v;
  return x;
}
Value Value::of_string(std::string v) {
  Value x;
  x.kind = Kind::string;
  x.s = std::move(v);
  return x;
}
Value Value::of_array(std::vector<Value> v) {
  Value x;
  x.kind = Kind::array;
  x.items = std::move(v);
  return x;
}

Value parse_scalar_lenient(const std::string& text) {
  std::string t = trim(text);
  try {
    return parse_value(t, "override", 0);
  } catch (const ConfigError&) {
    return Value::of_string(t);
  }
}

Table Table::parse(const std::string& text, const std::string& source_name) {
  Table root;
  Table* current = &root;
  std::set<std::string> seen_sections;
  std::string current_path;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    int start_line = line_no;
    std::string s = trim(strip_comment(line));
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.size() < 3 || s.back() != ']')
        fail(source_name, start_line, "malformed section header: " + s);
      std::string path = trim(s.substr(1, s.size() - 2));
      if (path.empty()) fail(source_name, start_line, "empty section name");
      if (!seen_sections.insert(path).second)
        fail(source_name, start_line, "duplicate section [" + path + "]");
      current = &root;
      current_path = path;
      std::string rest = path;
      while (!rest.empty()) {
        size_t dot = rest.find('.');
        std::string part = dot == std::string::npos ? rest : rest.substr(0, dot);
        rest = dot == std::string::npos ? "" : rest.substr(dot + 1);
        if (!valid_key(part))
          fail(source_name, start_line, "invalid section name: " + path);
        current = &current->children_[part];
      }
      continue;
    }

    size_t eq = std::string::npos;
    {
      bool in_string = false;
      for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
          if (c == '\\') ++i;
          else if (c == '"') in_string = false;
        } else if (c == '"') {
          in_string = true;
        } else if (c == '=') {
          eq = i;
          break;
        }
      }
    }
    if (eq == std::string::npos)
      fail(source_name, start_line, "expected key = value: " + s);
    std::string key = trim(s.substr(0, eq));
    std::string value_text = trim(s.substr(eq + 1));
    if (!valid_key(key)) fail(source_name, start_line, "invalid key: " + key);

    // Arrays may span lines: keep reading until brackets balance.
    if (!value_text.empty() && value_text.front() == '[') {
      auto balanced = [](const std::string& t) {
        bool in_string = false;
        int depth = 0;
        for (size_t i = 0; i < t.size(); ++i) {
          char c = t[i];
          if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
          } else if (c == '"') in_string = true;
          else if (c == '[') ++depth;
          else if (c == ']') --depth;
        }
        return depth == 0;
      };
      while (!balanced(value_text)) {
        std::string extra;
        if (!std::getline(in, extra))
          fail(source_name, start_line, "unterminated array for key " + key);
        ++line_no;
        value_text += " " + trim(strip_comment(extra));
      }
    }

    if (current->values_.count(key))
      fail(source_name, start_line,
           "duplicate key " + key +
               (current_path.empty() ? "" : " in [" + current_path + "]"));
    if (current->children_.count(key))
      fail(source_name, start_line, "key collides with section: " + key);
    current->values_[key] = parse_value(value_text, source_name, start_line);
  }
  return root;
}

Table Table::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const Value* Table::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_values_.insert(key);
  return &it->second;
}

const Table* Table::child(const std::string& name) const {
  auto it = children_.find(name);
  if (it == children_.end()) return nullptr;
  consumed_children_.insert(name);
  return &it->second;
}

bool Table::has_child(const std::string& name) const {
  return children_.count(name) > 0;
}

void Table::set(const std::string& dotted_path, Value v) {
  if (dotted_path.empty()) throw ConfigError("empty override path");
  Table* current = this;
  std::string rest = dotted_path;
  while (true) {
    size_t dot = rest.find('.');
    if (dot == std::string::npos) {
      if (!valid_key(rest))
        throw ConfigError("invalid override key: " + dotted_path);
      if (current->children_.count(rest))
        throw ConfigError("override path names a section, not a key: " +
                          dotted_path);
      current->values_[rest] = std::move(v);
      return;
    }
    std::string part = rest.substr(0, dot);
    rest = rest.substr(dot + 1);
    if (!valid_key(part) || rest.empty())
      throw ConfigError("invalid override path: " + dotted_path);
    if (current->values_.count(part))
      throw ConfigError("override path crosses a value: " + dotted_path);
    current = &current->children_[part];
  }
}

void Table::collect_unconsumed(const std::string& prefix,
                               std::vector<std::string>& out) const {
  for (const auto& [key, value] : values_) {
    (void)value;
    if (!consumed_values_.count(key)) out.push_back(prefix + key);
  }
  for (const auto& [name, child_table] : children_) {
    if (!consumed_children_.count(name)) {
      out.push_back(prefix + name + " (section)");
      continue;
    }
    child_table.collect_unconsumed(prefix + name + ".", out);
  }
}

std::vector<std::string> Table::unconsumed() const {
  std::vector<std::string> out;
  collect_unconsumed("", out);
  return out;
}

namespace {

std::string serialize_value(const Value& v) {
  switch (v.kind) {
    case Value::Kind::integer: return std::to_string(v.i);
    case Value::Kind::floating: return format_double(v.d);
    case Value::Kind::boolean: return v.b ? "true" : "false";
    case Value::Kind::string: {
      std::string out = "\"";
      for (char c : v.s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      out += '"';
      return out;
    }
    case Value::Kind::array: {
      std::string out = "[";
      for (size_t i = 0; i < v.items.size(); ++i) {
        if (i) out += ", ";
        out += serialize_value(v.items[i]);
      }
      out += "]";
      return out;
    }
  }
  return "";
}

}  // namespace

void Table::serialize_into(const std::string& prefix, std::string& out) const {
  if (!values_.empty() && !prefix.empty()) {
    out += "[" + prefix.substr(0, prefix.size() - 1) + "]\n";
  }
  for (const auto& [key, value] : values_)
    out += key + " = " + serialize_value(value) + "\n";
  if (!values_.empty()) out += "\n";
  for (const auto& [name, child_table] : children_)
    child_table.serialize_into(prefix + name + ".", out);
}

std::string Table::serialize() const {
  std::string out;
  serialize_into("", out);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    double back = 0.0;
    if (parse_float(buf, back) && back == x) break;
  }
  std::string s = buf;
  // Keep floats visually distinct from integers.
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

}  // namespace czgrape::toml
