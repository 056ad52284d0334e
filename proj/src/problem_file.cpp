#include "ralm/problem_file.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ralm/format.hpp"

namespace ralm {

namespace toml {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::string& source) : text_(text), source_(source) {}

  Document run() {
    Document doc;
    doc[""];
    std::string section;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        skip_spaces();
        section = bare_key();
        skip_spaces();
        expect(']');
        if (doc.count(section) && section != "") fail("duplicate section [" + section + "]");
        doc[section];
        end_of_line();
        continue;
      }
      const int line = line_, col = column();
      const std::string key = bare_key();
      skip_spaces();
      expect('=');
      skip_spaces();
      Value v = value();
      Table& table = doc[section];
      if (table.count(key)) fail_at(line, col, "duplicate key '" + key + "'");
      table.emplace(key, std::move(v));
      end_of_line();
    }
    return doc;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  int column() const { return static_cast<int>(pos_ - line_start_) + 1; }

  [[noreturn]] void fail_at(int line, int col, const std::string& msg) const {
    throw LoadError(source_ + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(line_, column(), msg); }

  void newline() {
    ++pos_;
    ++line_;
    line_start_ = pos_;
  }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (!eof() && peek() == '\n') {
        newline();
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected '" + std::string(1, peek()) + "'");
    newline();
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  Value value() {
    Value v;
    v.line = line_;
    v.column = column();
    if (eof()) fail("expected a value");
    const char c = peek();
    if (c == '"') {
      v.kind = Value::Kind::String;
      v.string = basic_string();
    } else if (c == '[') {
      v.kind = Value::Kind::Array;
      ++pos_;
      for (;;) {
        skip_blank_lines();
        if (eof()) fail("unterminated array");
        if (peek() == ']') {
          ++pos_;
          break;
        }
        v.items.push_back(value());
        skip_blank_lines();
        if (!eof() && peek() == ',') {
          ++pos_;
          continue;
        }
        skip_blank_lines();
        expect(']');
        break;
      }
    } else if (text_.substr(pos_, 4) == "true") {
      v.kind = Value::Kind::Bool;
      v.boolean = true;
      pos_ += 4;
    } else if (text_.substr(pos_, 5) == "false") {
      v.kind = Value::Kind::Bool;
      pos_ += 5;
    } else {
      v.kind = Value::Kind::Number;
      const std::size_t start = pos_;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                        peek() == '-' || peek() == '.' || peek() == '_')) {
        ++pos_;
      }
      std::string tok(text_.substr(start, pos_ - start));
      std::erase(tok, '_');
      try {
        v.number = parse_double(tok);
      } catch (const std::invalid_argument&) {
        fail_at(v.line, v.column, "invalid value '" + tok + "'");
      }
      if (!std::isfinite(v.number)) fail_at(v.line, v.column, "non-finite number");
    }
    return v;
  }

  std::string basic_string() {
    ++pos_;
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = peek();
      ++pos_;
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated string");
      const char e = peek();
      ++pos_;
      switch (e) {
        case '"':
          out += '"';
          break;
        case '\\':
          out += '\\';
          break;
        case 'n':
          out += '\n';
          break;
        case 't':
          out += '\t';
          break;
        default:
          fail(std::string("unknown escape '\\") + e + "'");
      }
    }
  }

  std::string_view text_;
  const std::string& source_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
};

}  // namespace

Document parse(std::string_view text, const std::string& source) {
  return Parser(text, source).run();
}

}  // namespace toml

namespace {

std::string where(const std::string& source, const toml::Value& v) {
  return source + ":" + std::to_string(v.line) + ":" + std::to_string(v.column) + ": ";
}

const std::string& get_string(const toml::Value& v, const std::string& source,
                              const std::string& key) {
  if (v.kind != toml::Value::Kind::String) throw LoadError(where(source, v) + key + " must be a string");
  return v.string;
}

double get_number(const toml::Value& v, const std::string& source, const std::string& key) {
  if (v.kind != toml::Value::Kind::Number) throw LoadError(where(source, v) + key + " must be a number");
  return v.number;
}

std::vector<std::string> get_strings(const toml::Value& v, const std::string& source,
                                     const std::string& key) {
  if (v.kind != toml::Value::Kind::Array) throw LoadError(where(source, v) + key + " must be an array");
  std::vector<std::string> out;
  for (const auto& item : v.items) out.push_back(get_string(item, source, key));
  return out;
}

Vec get_vector(const toml::Value& v, const std::string& source, const std::string& key) {
  if (v.kind != toml::Value::Kind::Array) throw LoadError(where(source, v) + key + " must be an array");
  Vec out(static_cast<Eigen::Index>(v.items.size()));
  for (std::size_t i = 0; i < v.items.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = get_number(v.items[i], source, key);
  }
  return out;
}

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> builtin_dirs() {
  std::vector<std::filesystem::path> out;
  const char* env = std::getenv("RALM_BUILTIN_DIR");
  if (env == nullptr) return out;
  std::string_view s(env);
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ':') {
      if (i > start) out.emplace_back(std::string(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

void SolverOverrides::apply(alm::AlmConfig& cfg) const {
  if (tau) cfg.tau = *tau;
  if (gamma) cfg.gamma = *gamma;
  if (lambda_min) cfg.lambda_min = *lambda_min;
  if (lambda_max) cfg.lambda_max = *lambda_max;
  if (mu_max) cfg.mu_max = *mu_max;
  if (rho1) cfg.rho1 = *rho1;
  if (eps_fixed) {
    cfg.eps_schedule = alm::EpsSchedule::fixed(*eps_fixed);
  } else if (eps0 || eps_factor) {
    cfg.eps_schedule = alm::EpsSchedule::geometric(eps0.value_or(cfg.eps_schedule.initial),
                                                   eps_factor.value_or(cfg.eps_schedule.factor));
  }
  if (kkt_tol) cfg.kkt_tol = *kkt_tol;
  if (feas_tol) cfg.feas_tol = *feas_tol;
  if (max_outer) cfg.max_outer = *max_outer;
}

ProblemFile parse_problem_file(std::string_view text, const std::string& source) {
  const toml::Document doc = toml::parse(text, source);
  static const std::set<std::string> root_keys = {
      "name",         "manifold", "variables", "objective", "equalities",
      "inequalities", "start",    "reference_point"};
  static const std::set<std::string> solver_keys = {
      "tau",      "gamma",      "lambda_min", "lambda_max", "mu_max",  "rho1",
      "eps0",     "eps_factor", "eps_fixed",  "max_outer",  "kkt_tol", "feas_tol"};
  for (const auto& [section, table] : doc) {
    if (section != "" && section != "solver") {
      throw LoadError(source + ": unknown section [" + section + "]");
    }
    const auto& allowed = section == "" ? root_keys : solver_keys;
    for (const auto& [key, v] : table) {
      if (!allowed.count(key)) throw LoadError(where(source, v) + "unknown key '" + key + "'");
    }
  }
  const toml::Table& root = doc.at("");
  auto require = [&](const std::string& key) -> const toml::Value& {
    const auto it = root.find(key);
    if (it == root.end()) throw LoadError(source + ": missing key '" + key + "'");
    return it->second;
  };

  ProblemFile pf;
  pf.source = source;
  const std::string name = get_string(require("name"), source, "name");
  const toml::Value& mv = require("manifold");
  Manifold manifold = Manifold::euclidean(1);
  try {
    manifold = Manifold::parse(get_string(mv, source, "manifold"));
  } catch (const ManifoldError& e) {
    throw LoadError(where(source, mv) + e.what());
  }
  const std::vector<std::string> vars = get_strings(require("variables"), source, "variables");

  Problem prob;
  prob.name = name;
  prob.manifold = manifold;
  prob.var_names = vars;
  auto parse_expr = [&](const toml::Value& v, const std::string& key) {
    const std::string& text = get_string(v, source, key);
    try {
      return expr::parse(text, vars);
    } catch (const ParseError& e) {
      // Columns point inside the string literal (after the opening quote).
      throw LoadError(source + ":" + std::to_string(v.line) + ":" +
                      std::to_string(v.column + 1 + static_cast<int>(e.offset())) + ": " + key +
                      ": " + e.what());
    }
  };
  prob.objective = parse_expr(require("objective"), "objective");
  for (const char* key : {"equalities", "inequalities"}) {
    const auto it = root.find(key);
    if (it == root.end()) continue;
    if (it->second.kind != toml::Value::Kind::Array) {
      throw LoadError(where(source, it->second) + key + " must be an array");
    }
    auto& dst = std::string(key) == "equalities" ? prob.equalities : prob.inequalities;
    for (const auto& item : it->second.items) dst.push_back(parse_expr(item, key));
  }
  try {
    prob.validate();
  } catch (const PreconditionError& e) {
    throw LoadError(source + ": " + e.what());
  }
  pf.problem = std::move(prob);

  for (const char* key : {"start", "reference_point"}) {
    const auto it = root.find(key);
    if (it == root.end()) continue;
    Vec v = get_vector(it->second, source, key);
    if (v.size() != pf.problem.manifold.ambient_dim()) {
      throw LoadError(where(source, it->second) + key + " has " + std::to_string(v.size()) +
                      " entries, expected " + std::to_string(pf.problem.manifold.ambient_dim()));
    }
    try {
      v = pf.problem.manifold.make_point(v).coords;
    } catch (const ManifoldError& e) {
      throw LoadError(where(source, it->second) + key + ": " + e.what());
    }
    (std::string(key) == "start" ? pf.start : pf.reference_point) = v;
  }

  const auto sit = doc.find("solver");
  if (sit != doc.end()) {
    const toml::Table& t = sit->second;
    SolverOverrides& o = pf.solver;
    const std::pair<const char*, std::optional<double>*> scalars[] = {
        {"tau", &o.tau},         {"gamma", &o.gamma},          {"lambda_min", &o.lambda_min},
        {"lambda_max", &o.lambda_max}, {"mu_max", &o.mu_max},  {"rho1", &o.rho1},
        {"eps0", &o.eps0},       {"eps_factor", &o.eps_factor}, {"kkt_tol", &o.kkt_tol},
        {"feas_tol", &o.feas_tol}};
    for (const auto& [key, dst] : scalars) {
      const auto it = t.find(key);
      if (it != t.end()) *dst = get_number(it->second, source, key);
    }
    if (const auto it = t.find("max_outer"); it != t.end()) {
      const double v = get_number(it->second, source, "max_outer");
      if (v != std::floor(v) || v < 1) {
        throw LoadError(where(source, it->second) + "max_outer must be a positive integer");
      }
      o.max_outer = static_cast<int>(v);
    }
    if (const auto it = t.find("eps_fixed"); it != t.end()) {
      const Vec v = get_vector(it->second, source, "eps_fixed");
      o.eps_fixed = std::vector<double>(v.data(), v.data() + v.size());
    }
    alm::AlmConfig probe;
    o.apply(probe);
    try {
      probe.validate();
    } catch (const PreconditionError& e) {
      throw LoadError(source + ": [solver]: " + e.what());
    }
  }
  return pf;
}

ProblemFile load_problem(const std::string& ref) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_regular_file(ref, ec)) {
    const auto text = read_file(ref);
    if (!text) throw LoadError("cannot read '" + ref + "'");
    return parse_problem_file(*text, ref);
  }
  for (const fs::path& dir : builtin_dirs()) {
    const fs::path candidate = dir / (ref + ".toml");
    if (fs::is_regular_file(candidate, ec)) {
      const auto text = read_file(candidate);
      if (!text) throw LoadError("cannot read '" + candidate.string() + "'");
      return parse_problem_file(*text, candidate.string());
    }
  }
  for (const auto& [name, text] : builtin_sources()) {
    if (name == ref) return parse_problem_file(text, "builtin:" + name);
  }
  throw LoadError("no problem file or builtin named '" + ref + "'");
}

std::vector<std::string> list_builtins() {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& entry : builtin_sources()) {
    out.push_back(entry.first);
    seen.insert(entry.first);
  }
  namespace fs = std::filesystem;
  for (const fs::path& dir : builtin_dirs()) {
    std::error_code ec;
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir, ec)) {
      if (e.path().extension() == ".toml") names.push_back(e.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    for (auto& n : names) {
      if (seen.insert(n).second) out.push_back(std::move(n));
    }
  }
  return out;
}

Point start_point(const ProblemFile& pf) {
  const Manifold& M = pf.problem.manifold;
  if (pf.start) return M.make_point(*pf.start);
  return M.make_point(Vec::Ones(M.ambient_dim()));
}

}  // namespace ralm
