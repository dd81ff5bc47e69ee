#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "jetsym/dynsys.hpp"
#include "jetsym/gauge.hpp"
#include "jetsym/oracle.hpp"

namespace jetsym::cli {

using json = nlohmann::ordered_json;

// Problem file rejected before any computation: exit code 2.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& file, int line, const std::string& entity, const std::string& message);
};

struct Twist {
  TwistData data;
  std::string kind;  // none, lambda, mu, sigma
};

class Problem {
 public:
  // Parses and validates every entity; throws InputError.
  static Problem load(const std::string& path);
  static Problem from_text(const std::string& text, const std::string& path);

  const std::string& path() const noexcept { return path_; }
  const json& command() const noexcept { return command_; }
  const std::optional<JetSpace>& space() const noexcept { return space_; }
  const JetSpace& require_space(const std::string& entity) const;

  // Oracle block from the file, if present.
  const json& oracle_block() const noexcept { return oracle_; }

  const VectorField& field(const std::string& name) const;
  const Twist& twist(const std::string& name) const;
  const DiffEq& equation(const std::string& name) const;
  const Expr& lagrangian(const std::string& name) const;
  const ExprMatrix& matrix(const std::string& name) const;
  const DynamicalSystem& system(const std::string& name) const;
  const std::vector<std::string>& algebra(const std::string& name) const;

  // Command argument accessors; missing required keys raise InputError.
  bool has(const std::string& key) const { return command_.contains(key); }
  std::string str_arg(const std::string& key) const;
  std::optional<std::string> opt_str(const std::string& key) const;
  int int_arg(const std::string& key, std::optional<int> fallback = std::nullopt) const;
  bool bool_arg(const std::string& key, bool fallback) const;
  double num_arg(const std::string& key) const;
  std::vector<std::string> names_arg(const std::string& key) const;
  // Expression argument parsed under `space`.
  Expr expr_arg(const std::string& key, const JetSpace& space) const;
  std::vector<Expr> exprs_arg(const std::string& key, const JetSpace& space) const;
  ExprMatrix matrix_arg(const std::string& key, const JetSpace& space) const;
  const json& raw_arg(const std::string& key) const;

  [[noreturn]] void fail(const std::string& section, const std::string& entity, const std::string& message) const;
  Expr parse_expr(const json& v, const JetSpace& S, const std::string& section, const std::string& entity) const;
  ExprMatrix parse_matrix(const json& v, const JetSpace& S, const std::string& section, const std::string& entity) const;

 private:
  int line_of(const std::string& section, const std::string& entity) const;
  void load_entities(const json& doc);

  std::string path_;
  std::string text_;
  json command_;
  json oracle_;
  std::optional<JetSpace> space_;
  std::map<std::string, VectorField> fields_;
  std::map<std::string, Twist> twists_;
  std::map<std::string, DiffEq> equations_;
  std::map<std::string, Expr> lagrangians_;
  std::map<std::string, ExprMatrix> matrices_;
  std::map<std::string, DynamicalSystem> systems_;
  std::map<std::string, std::vector<std::string>> algebras_;
};

}  // namespace jetsym::cli
