#include "balans/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "balans/errors.hpp"

namespace balans {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, int line_no) {
  double v = 0.0;
  std::string s = strip(text);
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s[0] == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last)
    throw ConfigError("line " + std::to_string(line_no) + ": malformed number '" + s + "'");
  return v;
}

// Cuts a '#' comment, but not inside a quoted string.
std::string cut_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

} // namespace

TomlDoc TomlDoc::parse_text(const std::string& text) {
  TomlDoc doc;
  std::istringstream in(text);
  std::string line;
  std::string table;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(cut_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": malformed table header");
      table = strip(line.substr(1, line.size() - 2));
      if (table.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty table name");
      doc.tables_[table];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = strip(line.substr(0, eq));
    std::string raw = strip(line.substr(eq + 1));
    if (key.empty() || raw.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    Value v;
    if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"')
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
      v.kind = Value::Kind::string;
      v.str = raw.substr(1, raw.size() - 2);
    } else if (raw == "true" || raw == "false") {
      v.kind = Value::Kind::boolean;
      v.flag = raw == "true";
    } else if (raw.front() == '[') {
      if (raw.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated array");
      v.kind = Value::Kind::array;
      std::string body = strip(raw.substr(1, raw.size() - 2));
      if (!body.empty()) {
        std::size_t pos = 0;
        while (pos != std::string::npos) {
          std::size_t comma = body.find(',', pos);
          std::string item = comma == std::string::npos ? body.substr(pos)
                                                        : body.substr(pos, comma - pos);
          v.arr.push_back(parse_number(item, line_no));
          pos = comma == std::string::npos ? std::string::npos : comma + 1;
        }
      }
    } else {
      v.kind = Value::Kind::number;
      v.num = parse_number(raw, line_no);
    }
    doc.tables_[table][key] = std::move(v);
  }
  return doc;
}

TomlDoc TomlDoc::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

const TomlDoc::Value& TomlDoc::lookup(const std::string& table, const std::string& key) const {
  auto t = tables_.find(table);
  if (t == tables_.end()) throw ConfigError("missing table [" + table + "]");
  auto k = t->second.find(key);
  if (k == t->second.end())
    throw ConfigError("missing key '" + key + "' in table [" + table + "]");
  return k->second;
}

bool TomlDoc::has(const std::string& table, const std::string& key) const {
  auto t = tables_.find(table);
  return t != tables_.end() && t->second.count(key) > 0;
}

std::string TomlDoc::get_string(const std::string& table, const std::string& key) const {
  const Value& v = lookup(table, key);
  if (v.kind != Value::Kind::string)
    throw ConfigError("key '" + key + "' in [" + table + "] must be a string");
  return v.str;
}

double TomlDoc::get_number(const std::string& table, const std::string& key) const {
  const Value& v = lookup(table, key);
  if (v.kind != Value::Kind::number)
    throw ConfigError("key '" + key + "' in [" + table + "] must be a number");
  return v.num;
}

bool TomlDoc::get_bool(const std::string& table, const std::string& key) const {
  const Value& v = lookup(table, key);
  if (v.kind != Value::Kind::boolean)
    throw ConfigError("key '" + key + "' in [" + table + "] must be true or false");
  return v.flag;
}

std::vector<double> TomlDoc::get_array(const std::string& table, const std::string& key) const {
  const Value& v = lookup(table, key);
  if (v.kind != Value::Kind::array)
    throw ConfigError("key '" + key + "' in [" + table + "] must be an array");
  return v.arr;
}

void TomlDoc::check_keys(const std::string& table,
                         const std::vector<std::string>& allowed) const {
  auto t = tables_.find(table);
  if (t == tables_.end()) return;
  for (const auto& [key, value] : t->second) {
    bool known = false;
    for (const auto& a : allowed) known = known || a == key;
    if (!known)
      throw ConfigError("unknown key '" + key + "' in table [" + table + "]");
  }
}

namespace {

int integer_value(const TomlDoc& doc, const std::string& table, const std::string& key) {
  double v = doc.get_number(table, key);
  if (v != std::floor(v) || v < -2.0e9 || v > 2.0e9)
    throw ConfigError("key '" + key + "' in [" + table + "] must be an integer");
  return static_cast<int>(v);
}

RunConfig config_from_doc(const TomlDoc& doc) {
  doc.check_keys("problem", {"catalog", "f", "g", "u_o", "u_a", "u_b", "a", "b", "T"});
  doc.check_keys("grid", {"N", "alpha", "cfl_fraction", "quad_points", "allow_unsafe_cfl"});
  doc.check_keys("outputs", {"snapshot_times", "dump", "out_dir"});
  doc.check_keys("audits", {"bounds", "entropy", "k_count", "bln"});

  RunConfig cfg;
  if (doc.has("problem", "catalog")) {
    cfg.catalog = doc.get_string("problem", "catalog");
    Ibvp base = [&]() {
      try {
        return catalog_problem(cfg.catalog);
      } catch (const InvariantError& e) {
        throw ConfigError(e.what());
      }
    }();
    cfg.f = base.flux.source();
    cfg.g = base.source.source();
    cfg.u_o = base.initial.source();
    cfg.u_a = base.bc_left.source();
    cfg.u_b = base.bc_right.source();
    cfg.a = base.a;
    cfg.b = base.b;
    cfg.T = base.horizon;
  }
  if (doc.has("problem", "f")) cfg.f = doc.get_string("problem", "f");
  if (doc.has("problem", "g")) cfg.g = doc.get_string("problem", "g");
  if (doc.has("problem", "u_o")) cfg.u_o = doc.get_string("problem", "u_o");
  if (doc.has("problem", "u_a")) cfg.u_a = doc.get_string("problem", "u_a");
  if (doc.has("problem", "u_b")) cfg.u_b = doc.get_string("problem", "u_b");
  if (doc.has("problem", "a")) cfg.a = doc.get_number("problem", "a");
  if (doc.has("problem", "b")) cfg.b = doc.get_number("problem", "b");
  if (doc.has("problem", "T")) cfg.T = doc.get_number("problem", "T");

  if (doc.has("grid", "N")) cfg.N = integer_value(doc, "grid", "N");
  if (doc.has("grid", "alpha")) cfg.alpha = doc.get_number("grid", "alpha");
  if (doc.has("grid", "cfl_fraction")) cfg.cfl_fraction = doc.get_number("grid", "cfl_fraction");
  if (doc.has("grid", "quad_points"))
    cfg.quad_points = integer_value(doc, "grid", "quad_points");
  if (doc.has("grid", "allow_unsafe_cfl"))
    cfg.allow_unsafe_cfl = doc.get_bool("grid", "allow_unsafe_cfl");

  if (doc.has("outputs", "snapshot_times"))
    cfg.snapshot_times = doc.get_array("outputs", "snapshot_times");
  if (doc.has("outputs", "dump")) cfg.dump = doc.get_bool("outputs", "dump");
  if (doc.has("outputs", "out_dir")) cfg.out_dir = doc.get_string("outputs", "out_dir");

  if (doc.has("audits", "bounds")) cfg.audit_bounds_on = doc.get_bool("audits", "bounds");
  if (doc.has("audits", "entropy")) cfg.audit_entropy_on = doc.get_bool("audits", "entropy");
  if (doc.has("audits", "k_count"))
    cfg.k_count = integer_value(doc, "audits", "k_count");
  if (doc.has("audits", "bln")) cfg.audit_bln_on = doc.get_bool("audits", "bln");

  for (double t : cfg.snapshot_times)
    if (t < 0.0 || t > cfg.T)
      throw ConfigError("snapshot time outside [0, T]");
  return cfg;
}

} // namespace

RunConfig load_config(const std::string& path) {
  return config_from_doc(TomlDoc::parse_file(path));
}

RunConfig config_from_text(const std::string& text) {
  return config_from_doc(TomlDoc::parse_text(text));
}

Ibvp problem_from_config(const RunConfig& cfg) {
  try {
    return make_ibvp(cfg.f, cfg.g, cfg.u_o, cfg.u_a, cfg.u_b, cfg.a, cfg.b, cfg.T,
                     cfg.catalog.empty() ? "custom" : cfg.catalog);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("bad expression in [problem]: ") + e.what());
  } catch (const EvalError& e) {
    throw ConfigError(std::string("data expression failed to evaluate: ") + e.what());
  } catch (const InvariantError& e) {
    throw ConfigError(std::string("bad [problem]: ") + e.what());
  }
}

Grid grid_from_config(const Ibvp& p, const RunConfig& cfg) {
  try {
    return build_grid(p, cfg.N, cfg.alpha, cfg.cfl_fraction, cfg.allow_unsafe_cfl);
  } catch (const InvariantError& e) {
    throw ConfigError(std::string("bad [grid]: ") + e.what());
  }
}

} // namespace balans
