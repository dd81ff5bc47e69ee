#include "jetsym/dynsys.hpp"

#include <cmath>

#include "jetsym/error.hpp"
#include "jetsym/fit.hpp"
#include "jetsym/program.hpp"

namespace jetsym {

DynamicalSystem::DynamicalSystem(JetSpace space, std::vector<Expr> f) : space_(std::move(space)), f_(std::move(f)) {
  if (space_.n() != 1) throw Error(Errc::invalid_argument, "a dynamical system has one independent variable");
  if (f_.size() != static_cast<std::size_t>(space_.m())) throw Error(Errc::size_mismatch, "f must have one entry per state");
  const SymbolId t = space_.independent(0);
  for (const auto& e : f_) {
    if (e.depends_on(t)) throw Error(Errc::invalid_argument, "time-dependent vector fields are not supported");
    if (space_.order_of(e) > 0) throw Error(Errc::invalid_argument, "f must be a function of the state only");
  }
}

DiffEq DynamicalSystem::as_diffeq() const {
  std::vector<SolvedEntry> entries;
  for (std::size_t a = 0; a < f_.size(); ++a) entries.push_back(SolvedEntry{static_cast<int>(a), MultiIndex{1}, f_[a]});
  return DiffEq(space_, std::move(entries));
}

StructureConstants structure_constants(const std::vector<VectorField>& fields, const JetSpace& S, const Oracle& oracle) {
  const std::size_t r = fields.size(), m = static_cast<std::size_t>(S.m());
  StructureConstants c(r, std::vector<std::vector<Rational>>(r, std::vector<Rational>(r)));
  if (r < 2) return c;
  std::vector<Expr> flat;
  for (const auto& X : fields) flat.insert(flat.end(), X.phi.begin(), X.phi.end());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a + 1; b < r; ++b) {
      auto C = commutator(fields[a], fields[b], S);
      flat.insert(flat.end(), C.phi.begin(), C.phi.end());
      pairs.emplace_back(a, b);
    }
  }
  // stack all sample points: sum_g c_g phi_g = C at every point
  auto pts = oracle.sample_points(flat, 12);
  Program prog(flat);
  std::vector<double> in(prog.inputs().size()), out(flat.size());
  DenseMatrix M(pts.size() * m, r);
  std::vector<std::vector<double>> rhs(pairs.size(), std::vector<double>(pts.size() * m));
  std::size_t row = 0;
  for (const auto& p : pts) {
    for (std::size_t s = 0; s < in.size(); ++s) in[s] = p.at(prog.inputs()[s]);
    if (!prog.run(in, out)) continue;
    for (std::size_t i = 0; i < m; ++i, ++row) {
      for (std::size_t g = 0; g < r; ++g) M(row, g) = out[g * m + i];
      for (std::size_t q = 0; q < pairs.size(); ++q) rhs[q][row] = out[(r + q) * m + i];
    }
  }
  M.rows = row;
  M.data.resize(row * r);
  for (auto& v : rhs) v.resize(row);
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    double res = 0, vmax = 0;
    int rank = 0;
    for (double v : rhs[q]) vmax = std::max(vmax, std::abs(v));
    auto sol = least_squares(M, rhs[q], &res, &rank);
    if (rank < static_cast<int>(r)) throw Error(Errc::precondition_failure, "algebra fields are linearly dependent");
    if (res > 1e-8 * (1 + vmax) * std::sqrt(static_cast<double>(row)))
      throw Error(Errc::precondition_failure, "brackets do not close with constant coefficients");
    const auto [a, b] = pairs[q];
    for (std::size_t g = 0; g < r; ++g) {
      auto v = Rational::approximate(sol[g], 1000, 1e-7);
      if (!v) throw Error(Errc::precondition_failure, "structure constant is not a small rational");
      c[a][b][g] = *v;
      c[b][a][g] = -*v;
    }
  }
  return c;
}

AlgebraCertificate certify_algebra(const SymmetryAlgebra& alg, const JetSpace& S, const Oracle& oracle) {
  const std::size_t r = alg.fields.size();
  const auto& c = alg.structure;
  AlgebraCertificate out;
  if (c.size() != r) throw Error(Errc::size_mismatch, "structure constants do not match the field count");
  for (const auto& row : c) {
    if (row.size() != r) throw Error(Errc::size_mismatch, "structure constants do not match the field count");
    for (const auto& v : row)
      if (v.size() != r) throw Error(Errc::size_mismatch, "structure constants do not match the field count");
  }
  for (std::size_t a = 0; a < r; ++a) {
    if (!alg.fields[a].is_vertical()) throw Error(Errc::non_vertical_input, "algebra fields must be vertical");
    for (std::size_t b = 0; b < r; ++b)
      for (std::size_t g = 0; g < r; ++g) out.antisymmetric = out.antisymmetric && c[a][b][g] == -c[b][a][g];
  }
  // sum_d c^d_{ab} c^e_{dg} + cyclic = 0
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b)
      for (std::size_t g = 0; g < r; ++g)
        for (std::size_t e = 0; e < r; ++e) {
          Rational s(0);
          for (std::size_t d = 0; d < r; ++d) s += c[a][b][d] * c[d][g][e] + c[b][g][d] * c[d][a][e] + c[g][a][d] * c[d][b][e];
          out.jacobi = out.jacobi && s.is_zero();
        }
  std::vector<ExprPair> pairs;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a + 1; b < r; ++b) {
      auto C = commutator(alg.fields[a], alg.fields[b], S);
      VectorField rhs = VectorField::zero(S);
      for (std::size_t g = 0; g < r; ++g) {
        if (!c[a][b][g].is_zero()) rhs = rhs + Expr(c[a][b][g]) * alg.fields[g];
      }
      for (std::size_t i = 0; i < C.phi.size(); ++i) pairs.emplace_back(C.phi[i], rhs.phi[i]);
    }
  }
  out.brackets = oracle.all_equal(pairs);
  return out;
}

ExprMatrix sigma_from_perturbation(const SymmetryAlgebra& alg, const std::vector<Expr>& F, const JetSpace& S) {
  const std::size_t r = alg.fields.size();
  if (F.size() != r) throw Error(Errc::size_mismatch, "one perturbation function per algebra field");
  ExprMatrix sigma(r, r);
  for (std::size_t a = 0; a < r; ++a) {
    JetField Xa = as_jet_field(alg.fields[a], S);
    for (std::size_t b = 0; b < r; ++b) {
      std::vector<Expr> t{Xa.apply(F[b])};
      for (std::size_t g = 0; g < r; ++g) {
        if (!alg.structure[a][g][b].is_zero()) t.push_back(Expr(alg.structure[a][g][b]) * F[g]);
      }
      sigma(a, b) = Expr::sum(std::move(t));
    }
  }
  return sigma;
}

DynamicalSystem perturbed_system(const DynamicalSystem& ds, const SymmetryAlgebra& alg, const std::vector<Expr>& F) {
  if (F.size() != alg.fields.size()) throw Error(Errc::size_mismatch, "one perturbation function per algebra field");
  std::vector<Expr> g = ds.f();
  for (std::size_t a = 0; a < F.size(); ++a) {
    if (alg.fields[a].phi.size() != g.size()) throw Error(Errc::size_mismatch, "field dimension differs from the state");
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] + F[a] * alg.fields[a].phi[i];
  }
  return DynamicalSystem(ds.space(), std::move(g));
}

PerturbationReport verify_perturbation_symmetries(const DynamicalSystem& ds, const SymmetryAlgebra& alg, const std::vector<Expr>& F, int k,
                             const PerturbationOptions& options) {
  const Oracle& oracle = options.oracle;
  const JetSpace& S = ds.space();
  if (k < 1) throw Error(Errc::invalid_argument, "order must be at least 1");
  auto cert = certify_algebra(alg, S, oracle);
  if (!cert.antisymmetric) throw Error(Errc::precondition_failure, "structure constants are not antisymmetric");
  if (!cert.jacobi) throw Error(Errc::precondition_failure, "structure constants violate the Jacobi identity");
  if (!cert.brackets.holds) throw Error(Errc::precondition_failure, "fields do not satisfy the declared commutation relations");
  DiffEq base = ds.as_diffeq();
  for (std::size_t a = 0; a < alg.fields.size(); ++a) {
    if (!check_symmetry(base, prolong_standard(alg.fields[a], 1, S), oracle).holds)
      throw Error(Errc::precondition_failure, "field " + std::to_string(a + 1) + " is not a symmetry of the system");
  }
  const std::size_t r = alg.fields.size();
  ExprMatrix sigma = options.sigma ? *options.sigma : sigma_from_perturbation(alg, F, S);
  if (sigma.rows() != r || sigma.cols() != r) throw Error(Errc::size_mismatch, "sigma must be r x r");
  DynamicalSystem pert = perturbed_system(ds, alg, F);
  DiffEq peq = pert.as_diffeq();
  auto Ys = prolong_sigma(alg.fields, sigma, k, S);

  std::vector<ExprPair> inv;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a + 1; b < r; ++b) {
      JetField C = commutator(Ys[a].as_jet_field(), Ys[b].as_jet_field());
      JetField R;
      for (std::size_t g = 0; g < r; ++g) {
        if (!alg.structure[a][b][g].is_zero()) R = R + Expr(alg.structure[a][b][g]) * Ys[g].as_jet_field();
      }
      auto p = coefficient_pairs(C, R);
      inv.insert(inv.end(), p.begin(), p.end());
    }
  }
  ResidualOptions ro{.restricted = true, .prolonged = k > 1};
  std::vector<Expr> tan, std_tan;
  for (std::size_t a = 0; a < r; ++a) {
    auto t = symmetry_residual(peq, Ys[a], ro);
    tan.insert(tan.end(), t.begin(), t.end());
    auto s = symmetry_residual(peq, prolong_standard(alg.fields[a], k, S), ro);
    std_tan.insert(std_tan.end(), s.begin(), s.end());
  }
  return PerturbationReport{sigma, pert, oracle.all_equal(inv), oracle.all_zero(tan), oracle.all_zero(std_tan)};
}

namespace {

std::vector<std::string> state_names(std::size_t d) {
  if (d <= 3) {
    std::vector<std::string> v{"x", "y", "z"};
    v.resize(d);
    return v;
  }
  std::vector<std::string> v;
  for (std::size_t i = 0; i < d; ++i) v.push_back("x" + std::to_string(i + 1));
  return v;
}

}  // namespace

NormalFormInstance normal_form_instance(const std::vector<Rational>& eigenvalues, int degree_bound, const Oracle& oracle) {
  const std::size_t d = eigenvalues.size();
  if (d == 0) throw Error(Errc::invalid_argument, "empty spectrum");
  if (degree_bound < 0) throw Error(Errc::invalid_argument, "degree bound must be nonnegative");
  JetSpace S({"t"}, state_names(d), 3);
  std::vector<Expr> f;
  for (std::size_t i = 0; i < d; ++i) f.push_back(Expr(eigenvalues[i]) * S.u(static_cast<int>(i)));
  SymmetryAlgebra alg;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (eigenvalues[i] != eigenvalues[j]) continue;
      VectorField X = VectorField::zero(S);
      X.phi[i] = S.u(static_cast<int>(j));
      alg.fields.push_back(X);
    }
  }
  alg.structure = structure_constants(alg.fields, S, oracle);

  // exponent vectors with 1 <= |k| <= bound and <k, eigenvalues> = 0
  std::vector<std::vector<int>> resonant;
  std::vector<int> k(d, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i == d) {
      int tot = 0;
      Rational s(0);
      for (std::size_t j = 0; j < d; ++j) {
        tot += k[j];
        s += Rational(k[j]) * eigenvalues[j];
      }
      if (tot > 0 && s.is_zero()) resonant.push_back(k);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      k[i] = e;
      self(self, i + 1, left - e);
    }
    k[i] = 0;
  };
  rec(rec, 0, degree_bound);
  // keep generators: drop k when a different resonant k' <= k exists
  std::vector<Expr> inv;
  for (const auto& a : resonant) {
    bool minimal = true;
    for (const auto& b : resonant) {
      if (a == b) continue;
      bool le = true;
      for (std::size_t j = 0; j < d; ++j) le = le && b[j] <= a[j];
      if (le) {
        minimal = false;
        break;
      }
    }
    if (!minimal) continue;
    Expr mono(1);
    for (std::size_t j = 0; j < d; ++j) {
      if (a[j]) mono = mono * pow(S.u(static_cast<int>(j)), Rational(a[j]));
    }
    inv.push_back(mono);
  }
  if (inv.empty()) inv.push_back(Expr(1));
  return NormalFormInstance{DynamicalSystem(S, f), alg, inv};
}

}  // namespace jetsym
