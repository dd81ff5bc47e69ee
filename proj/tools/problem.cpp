#include "problem.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "jetsym/error.hpp"

namespace jetsym::cli {

namespace {

int line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

std::string describe(const json& v) {
  std::string s = v.dump();
  return s.size() > 40 ? s.substr(0, 37) + "..." : s;
}

}  // namespace

InputError::InputError(const std::string& file, int line, const std::string& entity, const std::string& message)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + (entity.empty() ? "" : entity + ": ") + message) {}

Problem Problem::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, 0, "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), path);
}

Problem Problem::from_text(const std::string& text, const std::string& path) {
  Problem p;
  p.path_ = path;
  p.text_ = text;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto k = msg.find("parse error"); k != std::string::npos) msg = msg.substr(k);
    throw InputError(path, line_at(text, e.byte == 0 ? 0 : e.byte - 1), "", "invalid JSON: " + msg);
  }
  if (!doc.is_object()) throw InputError(path, 1, "", "top level must be an object");
  p.load_entities(doc);
  return p;
}

int Problem::line_of(const std::string& section, const std::string& entity) const {
  std::size_t pos = 0;
  if (!section.empty()) {
    pos = text_.find("\"" + section + "\"");
    if (pos == std::string::npos) return 1;
  }
  if (!entity.empty()) {
    auto e = text_.find("\"" + entity + "\"", pos);
    if (e != std::string::npos) pos = e;
  }
  return line_at(text_, pos);
}

void Problem::fail(const std::string& section, const std::string& entity, const std::string& message) const {
  std::string label = section;
  if (!entity.empty()) label += label.empty() ? entity : "." + entity;
  throw InputError(path_, line_of(section, entity), label, message);
}

Expr Problem::parse_expr(const json& v, const JetSpace& S, const std::string& section, const std::string& entity) const {
  if (v.is_number_integer()) return Expr(Rational(v.get<std::int64_t>()));
  if (!v.is_string()) fail(section, entity, "expected an expression string, got " + describe(v));
  const auto& s = v.get_ref<const std::string&>();
  try {
    return S.parse(s);
  } catch (const ParseError& e) {
    fail(section, entity,
         std::string(to_string(e.code())) + " in \"" + s + "\": " + e.what());
  } catch (const Error& e) {
    fail(section, entity, std::string(to_string(e.code())) + " in \"" + s + "\": " + e.what());
  }
}

ExprMatrix Problem::parse_matrix(const json& v, const JetSpace& S, const std::string& section,
                                 const std::string& entity) const {
  if (!v.is_array() || v.empty() || !v.front().is_array())
    fail(section, entity, "expected a matrix as an array of rows");
  const std::size_t cols = v.front().size();
  ExprMatrix M(v.size(), cols);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) fail(section, entity, "rows have different lengths");
    for (std::size_t j = 0; j < cols; ++j) M(i, j) = parse_expr(v[i][j], S, section, entity);
  }
  return M;
}

const JetSpace& Problem::require_space(const std::string& entity) const {
  if (!space_) fail("space", entity, "a \"space\" block is required");
  return *space_;
}

void Problem::load_entities(const json& doc) {
  static const std::vector<std::string> known{"space",       "oracle",   "fields",   "twists",  "equations",
                                              "lagrangians", "matrices", "algebras", "systems", "command"};
  for (const auto& [k, v] : doc.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) fail(k, "", "unknown section");
  }
  if (doc.contains("oracle")) {
    oracle_ = doc["oracle"];
    if (!oracle_.is_object()) fail("oracle", "", "expected an object");
    for (const auto& [k, v] : oracle_.items()) {
      if (k == "seed" && !v.is_number_unsigned() && !v.is_number_integer()) fail("oracle", k, "expected an integer");
      if (k == "trials" && (!v.is_number_integer() || v.get<int>() < 1)) fail("oracle", k, "expected a positive integer");
      if (k == "tol" && (!v.is_number() || v.get<double>() <= 0)) fail("oracle", k, "expected a positive number");
      if (k != "seed" && k != "trials" && k != "tol") fail("oracle", k, "unknown setting");
    }
  }
  if (!doc.contains("command") || !doc["command"].is_object()) fail("command", "", "a \"command\" object is required");
  command_ = doc["command"];

  if (doc.contains("space")) {
    const auto& s = doc["space"];
    auto names = [&](const char* key, bool required) {
      std::vector<std::string> out;
      if (!s.contains(key)) {
        if (required) fail("space", key, "missing");
        return out;
      }
      if (!s[key].is_array()) fail("space", key, "expected an array of names");
      for (const auto& n : s[key]) {
        if (!n.is_string()) fail("space", key, "expected an array of names");
        out.push_back(n.get<std::string>());
      }
      return out;
    };
    auto ind = names("independent", true), dep = names("dependent", true), par = names("parameters", false);
    int order = 4;
    if (s.contains("max_order")) {
      if (!s["max_order"].is_number_integer()) fail("space", "max_order", "expected an integer");
      order = s["max_order"].get<int>();
    }
    try {
      space_.emplace(ind, dep, order, par);
    } catch (const Error& e) {
      fail("space", "", e.what());
    }
  }

  auto section = [&](const char* name) -> const json* {
    if (!doc.contains(name)) return nullptr;
    if (!doc[name].is_object()) fail(name, "", "expected an object of named entities");
    return &doc[name];
  };

  if (auto* f = section("fields")) {
    const auto& S = require_space("fields");
    for (const auto& [name, v] : f->items()) {
      VectorField X = VectorField::zero(S);
      if (!v.is_object()) fail("fields", name, "expected {\"xi\": [...], \"phi\": [...]}");
      for (const auto& [k, _] : v.items())
        if (k != "xi" && k != "phi") fail("fields", name, "unknown key \"" + k + "\"");
      auto fill = [&](const char* key, std::vector<Expr>& out, int size) {
        if (!v.contains(key)) return;
        const auto& a = v[key];
        if (!a.is_array() || static_cast<int>(a.size()) != size)
          fail("fields", name, std::string(key) + " needs " + std::to_string(size) + " entries");
        for (int i = 0; i < size; ++i) out[static_cast<std::size_t>(i)] = parse_expr(a[static_cast<std::size_t>(i)], S, "fields", name);
      };
      fill("xi", X.xi, S.n());
      fill("phi", X.phi, S.m());
      fields_.emplace(name, std::move(X));
    }
  }

  if (auto* t = section("twists")) {
    const auto& S = require_space("twists");
    for (const auto& [name, v] : t->items()) {
      if (!v.is_object() || v.size() != 1) fail("twists", name, "expected one of lambda, mu, sigma");
      Twist tw;
      const auto& [kind, body] = *v.items().begin();
      tw.kind = kind;
      if (kind == "lambda") {
        tw.data = LambdaTwist{parse_expr(body, S, "twists", name)};
      } else if (kind == "mu") {
        if (!body.is_array() || static_cast<int>(body.size()) != S.n())
          fail("twists", name, "mu needs one matrix per independent variable");
        MuTwist mu;
        for (const auto& m : body) {
          auto M = parse_matrix(m, S, "twists", name);
          if (M.rows() != static_cast<std::size_t>(S.m()) || !M.is_square()) fail("twists", name, "mu matrices must be m x m");
          mu.Lambda.push_back(std::move(M));
        }
        tw.data = std::move(mu);
      } else if (kind == "sigma") {
        auto M = parse_matrix(body, S, "twists", name);
        if (!M.is_square()) fail("twists", name, "sigma must be square");
        tw.data = SigmaTwist{std::move(M)};
      } else {
        fail("twists", name, "unknown twist kind \"" + kind + "\"");
      }
      try {
        check_twist_domain(tw.data, S);
      } catch (const Error& e) {
        fail("twists", name, e.what());
      }
      twists_.emplace(name, std::move(tw));
    }
  }

  if (auto* e = section("equations")) {
    const auto& S = require_space("equations");
    for (const auto& [name, v] : e->items()) {
      if (!v.is_object() || !v.contains("solved") || !v["solved"].is_array())
        fail("equations", name, "expected {\"solved\": [[coordinate, rhs], ...]}");
      std::vector<SolvedEntry> solved;
      for (const auto& entry : v["solved"]) {
        if (!entry.is_array() || entry.size() != 2) fail("equations", name, "solved entries are [coordinate, rhs] pairs");
        Expr lead = parse_expr(entry[0], S, "equations", name);
        if (lead.kind() != NodeKind::symbol || !S.jet(lead.symbol_id()))
          fail("equations", name, "\"" + describe(entry[0]) + "\" is not a jet coordinate");
        auto jc = *S.jet(lead.symbol_id());
        solved.push_back(SolvedEntry{jc.dependent, jc.index, parse_expr(entry[1], S, "equations", name)});
      }
      std::vector<Expr> residual;
      if (v.contains("residual")) {
        if (!v["residual"].is_array()) fail("equations", name, "residual must be an array");
        for (const auto& r : v["residual"]) residual.push_back(parse_expr(r, S, "equations", name));
      }
      try {
        equations_.emplace(name, DiffEq(S, std::move(solved), std::move(residual)));
      } catch (const Error& err) {
        fail("equations", name, err.what());
      }
    }
  }

  if (auto* l = section("lagrangians")) {
    const auto& S = require_space("lagrangians");
    for (const auto& [name, v] : l->items()) lagrangians_.emplace(name, parse_expr(v, S, "lagrangians", name));
  }

  if (auto* m = section("matrices")) {
    const auto& S = require_space("matrices");
    for (const auto& [name, v] : m->items()) matrices_.emplace(name, parse_matrix(v, S, "matrices", name));
  }

  if (auto* s = section("systems")) {
    const auto& S = require_space("systems");
    for (const auto& [name, v] : s->items()) {
      const json& f = v.is_object() && v.contains("f") ? v["f"] : v;
      if (!f.is_array()) fail("systems", name, "expected {\"f\": [...]}");
      std::vector<Expr> rhs;
      for (const auto& e : f) rhs.push_back(parse_expr(e, S, "systems", name));
      try {
        systems_.emplace(name, DynamicalSystem(S, std::move(rhs)));
      } catch (const Error& err) {
        fail("systems", name, err.what());
      }
    }
  }

  if (auto* a = section("algebras")) {
    for (const auto& [name, v] : a->items()) {
      if (!v.is_array() || v.empty()) fail("algebras", name, "expected a list of field names");
      std::vector<std::string> names;
      for (const auto& n : v) {
        if (!n.is_string() || !fields_.count(n.get<std::string>()))
          fail("algebras", name, "unknown field " + describe(n));
        names.push_back(n.get<std::string>());
      }
      algebras_.emplace(name, std::move(names));
    }
  }
}

namespace {

template <class Map>
const typename Map::mapped_type& lookup(const Problem& p, const Map& m, const std::string& section,
                                        const std::string& name) {
  auto it = m.find(name);
  if (it == m.end()) p.fail("command", name, "no " + section + " entry named \"" + name + "\"");
  return it->second;
}

}  // namespace

const VectorField& Problem::field(const std::string& name) const { return lookup(*this, fields_, "fields", name); }
const Twist& Problem::twist(const std::string& name) const { return lookup(*this, twists_, "twists", name); }
const DiffEq& Problem::equation(const std::string& name) const { return lookup(*this, equations_, "equations", name); }
const Expr& Problem::lagrangian(const std::string& name) const { return lookup(*this, lagrangians_, "lagrangians", name); }
const ExprMatrix& Problem::matrix(const std::string& name) const { return lookup(*this, matrices_, "matrices", name); }
const DynamicalSystem& Problem::system(const std::string& name) const { return lookup(*this, systems_, "systems", name); }
const std::vector<std::string>& Problem::algebra(const std::string& name) const {
  return lookup(*this, algebras_, "algebras", name);
}

const json& Problem::raw_arg(const std::string& key) const {
  if (!command_.contains(key)) fail("command", key, "missing argument \"" + key + "\"");
  return command_[key];
}

std::string Problem::str_arg(const std::string& key) const {
  const auto& v = raw_arg(key);
  if (!v.is_string()) fail("command", key, "expected a string");
  return v.get<std::string>();
}

std::optional<std::string> Problem::opt_str(const std::string& key) const {
  if (!command_.contains(key)) return std::nullopt;
  return str_arg(key);
}

int Problem::int_arg(const std::string& key, std::optional<int> fallback) const {
  if (!command_.contains(key) && fallback) return *fallback;
  const auto& v = raw_arg(key);
  if (!v.is_number_integer()) fail("command", key, "expected an integer");
  return v.get<int>();
}

bool Problem::bool_arg(const std::string& key, bool fallback) const {
  if (!command_.contains(key)) return fallback;
  if (!command_[key].is_boolean()) fail("command", key, "expected true or false");
  return command_[key].get<bool>();
}

double Problem::num_arg(const std::string& key) const {
  const auto& v = raw_arg(key);
  if (!v.is_number()) fail("command", key, "expected a number");
  return v.get<double>();
}

std::vector<std::string> Problem::names_arg(const std::string& key) const {
  const auto& v = raw_arg(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) fail("command", key, "expected a name or a list of names");
  std::vector<std::string> out;
  for (const auto& n : v) {
    if (!n.is_string()) fail("command", key, "expected a list of names");
    out.push_back(n.get<std::string>());
  }
  return out;
}

Expr Problem::expr_arg(const std::string& key, const JetSpace& space) const {
  return parse_expr(raw_arg(key), space, "command", key);
}

std::vector<Expr> Problem::exprs_arg(const std::string& key, const JetSpace& space) const {
  const auto& v = raw_arg(key);
  if (!v.is_array()) fail("command", key, "expected a list of expressions");
  std::vector<Expr> out;
  for (const auto& e : v) out.push_back(parse_expr(e, space, "command", key));
  return out;
}

ExprMatrix Problem::matrix_arg(const std::string& key, const JetSpace& space) const {
  const auto& v = raw_arg(key);
  if (v.is_string()) return matrix(v.get<std::string>());
  return parse_matrix(v, space, "command", key);
}

}  // namespace jetsym::cli
