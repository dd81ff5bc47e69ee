#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "jetsym/error.hpp"
#include "jetsym/fit.hpp"
#include "jetsym/invariants.hpp"
#include "jetsym/variational.hpp"

namespace jetsym::cli {

namespace {

json witness_json(const Witness& w) {
  json pt = json::object();
  for (const auto& [k, v] : w.point) pt[k] = v;
  return {{"point", pt}, {"lhs", w.lhs}, {"rhs", w.rhs}, {"index", w.index}};
}

json strings(const std::vector<Expr>& es) {
  json a = json::array();
  for (const auto& e : es) a.push_back(e.str());
  return a;
}

json matrix_json(const ExprMatrix& M) {
  json rows = json::array();
  for (std::size_t i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < M.cols(); ++j) r.push_back(M(i, j).str());
    rows.push_back(r);
  }
  return rows;
}

json field_json(const VectorField& X) { return {{"xi", strings(X.xi)}, {"phi", strings(X.phi)}}; }

json table_json(const ProlongedField& V) {
  json t = json::object();
  const auto& S = V.space();
  for (int a = 0; a < S.m(); ++a)
    for (const auto& J : S.multi_indices_upto(V.order())) t[S.coordinate_name(a, J)] = V.psi(a, J).str();
  return t;
}

void claim(CommandOutput& out, const std::string& name, const Verdict& v) { out.claims.push_back(verdict_json(name, v)); }

void claim(CommandOutput& out, const std::string& name, bool pass, const std::string& detail = {}) {
  json c = {{"name", name}, {"pass", pass}, {"max_residual", 0.0}};
  if (!detail.empty()) c["detail"] = detail;
  out.claims.push_back(c);
}

// Optional "expect": {name: expression} block compared by the oracle.
void expectations(CommandOutput& out, const Problem& p, const JetSpace& S, const Oracle& o,
                  const std::function<std::optional<Expr>(const std::string&)>& actual) {
  if (!p.has("expect")) return;
  const auto& e = p.raw_arg("expect");
  if (!e.is_object()) p.fail("command", "expect", "expected an object of name: expression");
  for (const auto& [name, v] : e.items()) {
    auto got = actual(name);
    if (!got) p.fail("command", name, "nothing named \"" + name + "\" in the result");
    claim(out, "expect " + name, o.equal(*got, p.parse_expr(v, S, "command", name)));
  }
}

std::optional<Twist> twist_of(const Problem& p) {
  if (auto t = p.opt_str("twist")) return p.twist(*t);
  return std::nullopt;
}

std::vector<VectorField> fields_of(const Problem& p, const char* key = "fields") {
  std::vector<VectorField> out;
  const char* k = p.has(key) ? key : "field";
  for (const auto& n : p.names_arg(k)) out.push_back(p.field(n));
  return out;
}

std::vector<std::string> field_names(const Problem& p, const char* key = "fields") {
  return p.names_arg(p.has(key) ? key : "field");
}

// Prolongs each field under the optional twist; sigma acts on the whole set.
std::vector<ProlongedField> prolong_all(const Problem& p, const std::vector<VectorField>& Xs, int k, const JetSpace& S,
                                        const Oracle& o) {
  auto tw = twist_of(p);
  if (tw && tw->kind == "sigma") {
    const auto& sig = std::get<SigmaTwist>(tw->data).sigma;
    if (sig.rows() != Xs.size()) p.fail("command", "twist", "sigma size does not match the number of fields");
    return prolong_sigma(Xs, sig, k, S);
  }
  MuOptions mo;
  mo.oracle = o;
  mo.unchecked = p.bool_arg("unchecked", false);
  std::vector<ProlongedField> out;
  for (const auto& X : Xs) out.push_back(tw ? prolong(X, tw->data, k, S, mo) : prolong_standard(X, k, S));
  return out;
}

const JetSpace& space(const Problem& p) { return p.require_space("command"); }

void op_prolong(const Problem& p, const Oracle& o, CommandOutput& out) {
  const auto& S = space(p);
  const int k = p.int_arg("order");
  auto names = field_names(p);
  auto Vs = prolong_all(p, fields_of(p), k, S, o);
  json tables = json::object();
  for (std::size_t i = 0; i < Vs.size(); ++i) tables[names[i]] = table_json(Vs[i]);
  out.result["twist"] = to_string(Vs.front().twist());
  out.result["order"] = k;
  out.result["prolongations"] = tables;
  if (p.bool_arg("check_contact", false)) {
    for (std::size_t i = 0; i < Vs.size(); ++i)
      claim(out, "contact " + names[i], o.all_zero(annihilates_contact(Vs[i])));
  }
  expectations(out, p, S, o, [&](const std::string& n) -> std::optional<Expr> {
    for (int a = 0; a < S.m(); ++a)
      for (const auto& J : S.multi_indices_upto(k))
        if (S.coordinate_name(a, J) == n) return Vs.front().psi(a, J);
    return std::nullopt;
  });
}

void op_mch(const Problem& p, const Oracle& o, CommandOutput& out) {
  const auto& S = space(p);
  const auto& tw = p.twist(p.str_arg("twist"));
  if (tw.kind != "mu") p.fail("command", "twist", "mch needs a mu twist");
  const auto& mu = std::get<MuTwist>(tw.data);
  json res = json::array();
  for (const auto& R : check_mch(mu, S)) res.push_back(matrix_json(R));
  out.result["residuals"] = res;
  claim(out, "mch", mch_verdict(mu, S, o));
}

void op_check_symmetry(const Problem& p, const Oracle& o, CommandOutput& out) {
  const auto& eq = p.equation(p.str_arg("equation"));
  const auto& S = eq.space();
  const int k = p.int_arg("order", eq.order());
  auto names = field_names(p);
  auto Vs = prolong_all(p, fields_of(p), k, S, o);
  ResidualOptions ro;
  ro.restricted = !p.bool_arg("strong", false);
  ro.prolonged = p.bool_arg("prolonged", false);
  json res = json::object();
  for (std::size_t i = 0; i < Vs.size(); ++i) {
    auto r = symmetry_residual(eq, Vs[i], ro);
    res[names[i]] = strings(r);
    claim(out, (ro.restricted ? "symmetry " : "strong symmetry ") + names[i], o.all_zero(r));
  }
  out.result["residuals"] = res;
}

std::vector<Expr> basis_from(const Problem& p, const json& v, const JetSpace& S, const std::string& key) {
  if (v.is_array()) {
    std::vector<Expr> out;
    for (const auto& e : v) out.push_back(p.parse_expr(e, S, "command", key));
    return out;
  }
  if (v.is_object() && v.contains("degree")) {
    std::vector<Expr> vars;
    if (v.contains("variables")) {
      for (const auto& e : v["variables"]) vars.push_back(p.parse_expr(e, S, "command", key));
    } else {
      for (int i = 0; i < S.n(); ++i) vars.push_back(S.x(i));
      for (int a = 0; a < S.m(); ++a) vars.push_back(S.u(a));
    }
    if (!v["degree"].is_number_integer()) p.fail("command", key, "degree must be an integer");
    return monomials(vars, v["degree"].get<int>());
  }
  if (v.is_null()) return {};
  p.fail("command", key, "expected a list of expressions or {\"degree\": d, \"variables\": [...]}");
}

void op_solve_ansatz(const Problem& p, const Oracle& o, CommandOutput& out) {
  const auto& eq = p.equation(p.str_arg("equation"));
  const auto& S = eq.space();
  AnsatzProblem ap;
  if (p.has("basis")) ap.basis = basis_from(p, p.raw_arg("basis"), S, "basis");
  if (p.has("per_component")) {
    const auto& pc = p.raw_arg("per_component");
    if (!pc.is_array() || static_cast<int>(pc.size()) != S.n() + S.m())
      p.fail("command", "per_component", "needs n + m entries");
    for (const auto& b : pc) ap.per_component.push_back(basis_from(p, b, S, "per_component"));
  }
  AnsatzOptions ao;
  ao.oracle = o;
  ao.certify_trials = p.int_arg("certify_trials", ao.certify_trials);
  auto tw = twist_of(p);
  auto sol = solve_determining_ansatz(eq, ap, tw ? tw->data : TwistData{NoTwist{}}, ao);
  json fs = json::array();
  for (const auto& X : sol.fields) fs.push_back(field_json(X));
  out.result["dimension"] = sol.fields.size();
  out.result["fields"] = fs;
  out.result["unknowns"] = sol.unknowns;
  out.result["rank"] = sol.rank;
  out.result["sample_points"] = sol.sample_points;
  for (std::size_t i = 0; i < sol.fields.size(); ++i) claim(out, "field " + std::to_string(i), sol.certificates[i]);
  if (p.has("expect_dimension")) {
    const int d = p.int_arg("expect_dimension");
    claim(out, "dimension", static_cast<int>(sol.fields.size()) == d,
          "expected " + std::to_string(d) + ", found " + std::to_string(sol.fields.size()));
  }
}

void op_invariants(const Problem& p, const Oracle& o, CommandOutput& out) {
  const auto& S = space(p);
  const int target = p.int_arg("target");
  const int k = p.int_arg("order", target);
  auto Vs = prolong_all(p, fields_of(p), k, S, o);
  Expr eta = p.expr_arg("eta", S), zeta = p.expr_arg("zeta", S);
  auto chain = generate_invariant_chain(Vs, eta, zeta, target, S, o);
  out.result["eta"] = eta.str();
  out.result["chain"] = strings([&] {
    std::vector<Expr> all{zeta};
    all.insert(all.end(), chain.generated.begin(), chain.generated.end());
    return all;
  }());
  for (std::size_t i = 0; i < chain.certificates.size(); ++i)
    claim(out, "invariant of order " + std::to_string(i + 2), chain.certificates[i]);
}

void op_reduce(const Problem& p, const Oracle& o, CommandOutput& out) {
  const auto& eq = p.equation(p.str_arg("equation"));
  const auto& S = eq.space();
  auto red = reduce_ode(eq, p.expr_arg("eta", S), p.expr_arg("zeta", S), o);
  const auto& R = red.reduced;
  const int N = red.equation.order();
  out.result["reduced_space"] = {{"independent", R.independent_names()}, {"dependent", R.dependent_names()}};
  out.result["reduced_equation"] = R.coordinate_name(0, MultiIndex{N}) + " = " + red.rhs.str();
  out.result["rhs"] = red.rhs.str();
  out.result["chain"] = strings(red.chain);
  out.result["substitution"] = strings(red.substitution);
  claim(out, "pullback", red.certificate);
  if (p.has("expect_rhs")) claim(out, "expect rhs", o.equal(red.rhs, p.expr_arg("expect_rhs", R)));
}

std::filesystem::path beside(const Problem& p, const std::string& file) {
  std::filesystem::path f(file);
  if (f.is_absolute()) return f;
  return std::filesystem::path(p.path()).parent_path() / f;
}

void op_reconstruct(const Problem& p, const Oracle&, CommandOutput& out) {
  JetSpace R({"y"}, {"w"}, 0);
  SampledFunction in;
  if (p.has("csv")) {
    auto path = beside(p, p.str_arg("csv"));
    std::ifstream f(path);
    if (!f) p.fail("command", "csv", "cannot open " + path.string());
    try {
      in = read_csv(f);
    } catch (const Error& e) {
      p.fail("command", "csv", path.string() + ": " + e.what());
    }
  } else if (p.has("w")) {
    const auto& g = p.raw_arg("grid");
    if (!g.is_object() || !g.contains("from") || !g.contains("to") || !g.contains("points") || !g["points"].is_number_integer())
      p.fail("command", "grid", "expected {\"from\": a, \"to\": b, \"points\": n}");
    const double a = g["from"].get<double>(), b = g["to"].get<double>();
    const int n = g["points"].get<int>();
    if (n < 2) p.fail("command", "grid", "need at least 2 points");
    Expr w = p.expr_arg("w", R);
    for (int i = 0; i < n; ++i) {
      const double y = a + (b - a) * i / (n - 1);
      EvalPoint pt;
      pt.set(R.independent(0), y);
      in.y.push_back(y);
      in.values.push_back(evaluate(w, pt));
    }
  } else {
    p.fail("command", "csv", "reconstruct needs \"csv\" or \"w\" with a \"grid\"");
  }
  SampledFunction v{in.y, reconstruct(in.y, in.values, p.num_arg("v0"))};
  out.result["points"] = v.y.size();
  if (auto o = p.opt_str("output")) {
    auto path = beside(p, *o);
    std::ofstream f(path);
    if (!f) throw Error(Errc::invalid_argument, "cannot write " + path.string());
    write_csv(f, v);
    out.result["output"] = *o;
  } else {
    out.result["y"] = v.y;
    out.result["v"] = v.values;
  }
  out.result["v_first"] = v.values.front();
  out.result["v_last"] = v.values.back();
  if (p.has("expect")) {
    JetSpace V({"y"}, {"v"}, 0);
    Expr e = p.expr_arg("expect", V);
    const double tol = p.has("expect_tol") ? p.num_arg("expect_tol") : 1e-6;
    double worst = 0;
    for (std::size_t i = 0; i < v.y.size(); ++i) {
      EvalPoint pt;
      pt.set(V.independent(0), v.y[i]);
      worst = std::max(worst, std::abs(evaluate(e, pt) - v.values[i]));
    }
    json c = {{"name", "expect v"}, {"pass", worst <= tol}, {"max_residual", worst}};
    out.claims.push_back(c);
  }
}

void op_gauge_verify(const Problem& p, const Oracle& o, CommandOutput& out) {
  const auto& S = space(p);
  ExprMatrix A = p.matrix_arg("matrix", S);
  const int k = p.int_arg("order");
  std::string kind = p.opt_str("kind").value_or(p.has("fields") ? "sigma" : "mu");
  if (kind == "mu") {
    auto mu = mu_from_gauge(A, S, o);
    json ls = json::array();
    for (const auto& L : mu.Lambda) ls.push_back(matrix_json(L));
    out.result["mu"] = ls;
    claim(out, "mch", mch_verdict(mu, S, o));
    auto rep = verify_gauge_diagram_mu(p.field(p.str_arg("field")), A, k, S, o);
    out.result["residual_count"] = rep.residuals.size();
    claim(out, "diagram", rep.verdict);
  } else if (kind == "sigma") {
    out.result["sigma"] = matrix_json(sigma_from_gauge(A, S, o).sigma);
    auto rep = verify_gauge_diagram_sigma(fields_of(p), A, k, S, o);
    out.result["residual_count"] = rep.residuals.size();
    claim(out, "diagram", rep.verdict);
  } else {
    p.fail("command", "kind", "expected \"mu\" or \"sigma\"");
  }
}

void op_variational(const Problem& p, const Oracle& o, CommandOutput& out) {
  const auto& S = space(p);
  const std::string task = p.str_arg("task");
  auto L = [&] { return p.lagrangian(p.str_arg("lagrangian")); };
  auto lam = [&] { return p.has("lambda") ? p.expr_arg("lambda", S) : Expr(0); };
  if (task == "euler-lagrange") {
    out.result["equations"] = strings(euler_lagrange(L(), S));
  } else if (task == "total-derivative") {
    claim(out, "total derivative", is_total_derivative(p.expr_arg("expression", S), S, o));
  } else if (task == "symmetry") {
    const auto& X = p.field(p.str_arg("field"));
    if (p.has("F")) {
      Expr F = p.expr_arg("F", S), l = lam();
      out.result["residual"] = variational_lambda_residual(X, l, L(), F, S).str();
      claim(out, "variational symmetry", check_variational_lambda_symmetry(X, l, L(), F, S, o));
    } else {
      claim(out, "variational symmetry", variational_symmetry_exists(X, L(), S, o));
    }
  } else if (task == "noether") {
    const auto& X = p.field(p.str_arg("field"));
    Expr F = noether_flux(X, lam(), L(), S);
    out.result["flux"] = F.str();
    claim(out, "noether identity", o.zero(noether_identity_residual(X, lam(), L(), F, S)));
  } else if (task == "flux-identity") {
    claim(out, "flux identity", verify_flux_identity(p.field(p.str_arg("field")), lam(), L(), p.expr_arg("P", S), S, o));
  } else if (task == "solvable-pair") {
    auto Xs = fields_of(p);
    auto ls = p.exprs_arg("lambdas", S);
    if (Xs.size() != 2 || ls.size() != 2) p.fail("command", "fields", "solvable-pair needs two fields and two lambdas");
    SolvablePairOptions so;
    so.oracle = o;
    auto r = check_solvable_pair(Xs[0], ls[0], Xs[1], ls[1], p.int_arg("order", 2), S, so);
    if (r.h) out.result["h"] = r.h->str();
    if (!r.failure.empty()) out.result["failure"] = r.failure;
    Verdict v = r.certificate;
    if (!r.h) v.holds = false;
    if (r.witness && !v.witness) v.witness = r.witness;
    claim(out, "solvable pair", v);
  } else if (task == "mu-euler-lagrange") {
    auto el = mu_euler_lagrange(L(), p.matrix_arg("Lambda", S), S, o);
    out.result["equations"] = strings(el.equations);
    out.result["accelerations"] = strings(el.accelerations);
  } else if (task == "mu-conservation") {
    auto m = check_mu_conservation(L(), p.matrix_arg("Lambda", S), p.field(p.str_arg("field")), S, o);
    out.result["P"] = m.P.str();
    claim(out, "hypothesis", m.hypothesis);
    claim(out, "conservation", m.conservation);
  } else {
    p.fail("command", "task", "unknown variational task \"" + task + "\"");
  }
}

std::vector<Rational> rationals(const Problem& p, const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) p.fail("command", key, "expected a list of rationals");
  std::vector<Rational> out;
  for (const auto& e : v) {
    std::optional<Rational> r;
    if (e.is_number_integer()) r = Rational(e.get<std::int64_t>());
    if (e.is_string()) r = Rational::from_string(e.get<std::string>());
    if (!r) p.fail("command", key, "not a rational: " + e.dump());
    out.push_back(*r);
  }
  return out;
}

json structure_json(const StructureConstants& c) {
  json out = json::array();
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = a + 1; b < c.size(); ++b)
      for (std::size_t g = 0; g < c.size(); ++g)
        if (!c[a][b][g].is_zero())
          out.push_back({{"a", a}, {"b", b}, {"g", g}, {"c", c[a][b][g].str()}});
  return out;
}

void op_dynsys(const Problem& p, const Oracle& o, CommandOutput& out) {
  std::optional<NormalFormInstance> inst;
  if (p.has("normal_form")) {
    const auto& nf = p.raw_arg("normal_form");
    if (!nf.is_object() || !nf.contains("eigenvalues")) p.fail("command", "normal_form", "expected {\"eigenvalues\": [...]}");
    const int bound = nf.contains("bound") && nf["bound"].is_number_integer() ? nf["bound"].get<int>() : 6;
    inst.emplace(normal_form_instance(rationals(p, nf["eigenvalues"], "normal_form"), bound, o));
    out.result["invariants"] = strings(inst->invariants);
    out.result["system"] = strings(inst->ds.f());
    json fs = json::array();
    for (const auto& X : inst->alg.fields) fs.push_back(field_json(X));
    out.result["algebra"] = fs;
  } else {
    SymmetryAlgebra alg;
    for (const auto& n : p.algebra(p.str_arg("algebra"))) alg.fields.push_back(p.field(n));
    const auto& ds = p.system(p.str_arg("system"));
    alg.structure = structure_constants(alg.fields, ds.space(), o);
    inst.emplace(NormalFormInstance{ds, alg, {}});
  }
  const auto& S = inst->ds.space();
  out.result["structure_constants"] = structure_json(inst->alg.structure);
  auto cert = certify_algebra(inst->alg, S, o);
  Verdict av = cert.brackets;
  av.holds = cert.holds();
  claim(out, "algebra", av);
  auto F = p.exprs_arg("F", S);
  if (F.size() != inst->alg.fields.size()) p.fail("command", "F", "needs one entry per algebra field");
  PerturbationOptions po;
  po.oracle = o;
  ExprMatrix sigma = sigma_from_perturbation(inst->alg, F, S);
  if (p.has("sigma")) sigma = p.matrix_arg("sigma", S);
  if (p.bool_arg("transpose_sigma", false)) sigma = sigma.transpose();
  if (p.has("sigma") || p.bool_arg("transpose_sigma", false)) po.sigma = sigma;
  out.result["sigma"] = matrix_json(sigma);
  out.result["perturbed"] = strings(perturbed_system(inst->ds, inst->alg, F).f());
  std::vector<int> orders;
  const auto& ord = p.has("order") ? p.raw_arg("order") : json(1);
  if (ord.is_number_integer()) {
    orders.push_back(ord.get<int>());
  } else if (ord.is_array()) {
    for (const auto& k : ord) {
      if (!k.is_number_integer()) p.fail("command", "order", "expected integers");
      orders.push_back(k.get<int>());
    }
  } else {
    p.fail("command", "order", "expected an integer or a list");
  }
  const bool expect_std_fails = p.bool_arg("expect_standard_fails", false);
  json std_tangent = json::object();
  for (int k : orders) {
    auto rep = verify_perturbation_symmetries(inst->ds, inst->alg, F, k, po);
    const std::string tag = " (k = " + std::to_string(k) + ")";
    claim(out, "involution" + tag, rep.involution);
    claim(out, "tangency" + tag, rep.tangency);
    std_tangent[std::to_string(k)] = rep.standard_tangency.holds;
    if (expect_std_fails) claim(out, "standard prolongations fail" + tag, rep.standard_fails());
  }
  out.result["standard_tangency"] = std_tangent;
}

}  // namespace

bool CommandOutput::passed() const {
  if (!error.is_null()) return false;
  for (const auto& c : claims)
    if (!c["pass"].get<bool>()) return false;
  return true;
}

json verdict_json(const std::string& name, const Verdict& v) {
  json c = {{"name", name}, {"pass", v.holds}, {"max_residual", v.max_residual}, {"points", v.points}};
  if (v.witness) c["witness"] = witness_json(*v.witness);
  return c;
}

CommandOutput run_operation(const std::string& op, const Problem& problem, const Oracle& oracle) {
  static const std::map<std::string, void (*)(const Problem&, const Oracle&, CommandOutput&)> table{
      {"prolong", op_prolong},         {"mch", op_mch},
      {"check-symmetry", op_check_symmetry}, {"solve-ansatz", op_solve_ansatz},
      {"invariants", op_invariants},   {"reduce", op_reduce},
      {"reconstruct", op_reconstruct}, {"gauge-verify", op_gauge_verify},
      {"variational", op_variational}, {"dynsys", op_dynsys},
  };
  auto it = table.find(op);
  if (it == table.end()) problem.fail("command", "op", "unknown operation \"" + op + "\"");
  CommandOutput out;
  try {
    it->second(problem, oracle, out);
  } catch (const Error& e) {
    out.error = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  }
  return out;
}

}  // namespace jetsym::cli
