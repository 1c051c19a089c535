#include "irkns/tableau.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

#include "irkns/errors.hpp"

namespace irkns {

namespace {

// Polynomials in monomial basis, ascending coefficients.
using Poly = std::vector<double>;

Poly poly_derivative(const Poly& p) {
  if (p.size() <= 1) return {0.0};
  Poly d(p.size() - 1);
  for (size_t k = 1; k < p.size(); ++k) d[k - 1] = p[k] * double(k);
  return d;
}

double poly_eval(const Poly& p, double x) {
  double v = 0.0;
  for (size_t k = p.size(); k-- > 0;) v = v * x + p[k];
  return v;
}

// Legendre polynomials shifted to [0,1]: Pt_n(x) = P_n(2x-1).
// (n+1) Pt_{n+1} = (2n+1)(2x-1) Pt_n - n Pt_{n-1}.
Poly shifted_legendre(int n) {
  Poly pm1 = {1.0};
  if (n == 0) return pm1;
  Poly p = {-1.0, 2.0};
  for (int k = 1; k < n; ++k) {
    Poly next(p.size() + 1, 0.0);
    for (size_t i = 0; i < p.size(); ++i) {
      next[i + 1] += (2.0 * k + 1.0) * 2.0 * p[i];
      next[i] -= (2.0 * k + 1.0) * p[i];
    }
    for (size_t i = 0; i < pm1.size(); ++i) next[i] -= double(k) * pm1[i];
    for (double& ci : next) ci /= double(k + 1);
    pm1 = std::move(p);
    p = std::move(next);
  }
  return p;
}

Poly poly_sub(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), 0.0);
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  while (r.size() > 1 && std::abs(r.back()) < 1e-14) r.pop_back();
  return r;
}

// All roots of p (assumed real and simple, inside [0,1]) via the companion
// matrix, polished with two Newton steps.
std::vector<double> real_roots(const Poly& p) {
  const int n = int(p.size()) - 1;
  if (n < 1) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[i] / p[n];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  const Poly dp = poly_derivative(p);
  std::vector<double> roots(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()[i].real();
    for (int it = 0; it < 2; ++it) {
      const double d = poly_eval(dp, x);
      if (std::abs(d) < 1e-300) break;
      x -= poly_eval(p, x) / d;
    }
    if (std::abs(x) < 1e-9) x = 0.0;
    if (std::abs(x - 1.0) < 1e-9) x = 1.0;
    roots[i] = x;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Weights from the B(s) conditions: sum_i b_i c_i^{k-1} = 1/k, k = 1..s.
Eigen::VectorXd quadrature_weights(const Eigen::VectorXd& c) {
  const int s = int(c.size());
  Eigen::MatrixXd V(s, s);
  Eigen::VectorXd m(s);
  for (int k = 0; k < s; ++k) {
    for (int j = 0; j < s; ++j) V(k, j) = std::pow(c[j], k);
    m[k] = 1.0 / double(k + 1);
  }
  return V.fullPivLu().solve(m);
}

// Row i of A from C(q): sum_j a_ij c_j^{k-1} = c_i^k / k, k = 1..q, over the
// given column subset.
void solve_collocation_rows(const Eigen::VectorXd& c, int col0,
                            Eigen::MatrixXd& A) {
  const int s = int(c.size());
  const int q = s - col0;
  Eigen::MatrixXd V(q, q);
  for (int k = 0; k < q; ++k)
    for (int j = 0; j < q; ++j) V(k, j) = std::pow(c[col0 + j], k);
  auto lu = V.fullPivLu();
  for (int i = 0; i < s; ++i) {
    Eigen::VectorXd rhs(q);
    for (int k = 0; k < q; ++k) {
      double v = std::pow(c[i], k + 1) / double(k + 1);
      for (int j = 0; j < col0; ++j) v -= A(i, j) * std::pow(c[j], k);
      rhs[k] = v;
    }
    A.row(i).segment(col0, q) = lu.solve(rhs).transpose();
  }
}

// Rooted trees up to order 6, grouped so a tree's children always precede it.
struct RootedTree {
  int order;
  std::vector<int> kids;  // indices into the global list
  double gamma;
};

const std::vector<RootedTree>& rooted_trees() {
  static const std::vector<RootedTree> trees = [] {
    std::vector<RootedTree> all;
    all.push_back({1, {}, 1.0});
    std::vector<std::vector<int>> by_order(7);
    by_order[1] = {0};
    for (int n = 2; n <= 6; ++n) {
      // Choose a non-decreasing multiset of existing trees of total order n-1.
      std::vector<int> kids;
      auto rec = [&](auto&& self, int first, int remaining) -> void {
        if (remaining == 0) {
          double g = double(n);
          for (int k : kids) g *= all[k].gamma;
          all.push_back({n, kids, g});
          by_order[n].push_back(int(all.size()) - 1);
          return;
        }
        for (int idx = first; idx < int(all.size()); ++idx) {
          if (all[idx].order > remaining) continue;
          kids.push_back(idx);
          self(self, idx, remaining - all[idx].order);
          kids.pop_back();
        }
      };
      rec(rec, 0, n - 1);
    }
    return all;
  }();
  return trees;
}

}  // namespace

const char* family_name(RKFamily f) {
  switch (f) {
    case RKFamily::RadauIIA: return "RadauIIA";
    case RKFamily::Gauss: return "Gauss";
    case RKFamily::LobattoIIIC: return "LobattoIIIC";
  }
  return "?";
}

RKFamily family_from_name(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return char(std::tolower(ch)); });
  if (s == "radauiia" || s == "radau") return RKFamily::RadauIIA;
  if (s == "gauss") return RKFamily::Gauss;
  if (s == "lobattoiiic" || s == "lobatto") return RKFamily::LobattoIIIC;
  throw Error("unknown Runge-Kutta family: " + std::string(name));
}

bool ButcherTableau::stiffly_accurate(double tol) const {
  return (A.row(s - 1).transpose() - b).lpNorm<Eigen::Infinity>() < tol;
}

std::string ButcherTableau::to_string() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(10);
  for (int i = 0; i < s; ++i) {
    os << " " << c[i] << " |";
    for (int j = 0; j < s; ++j) os << " " << A(i, j);
    os << "\n";
  }
  os << std::string(14, '-') << "+" << std::string(size_t(s) * 14, '-') << "\n";
  os << std::string(13, ' ') << " |";
  for (int j = 0; j < s; ++j) os << " " << b[j];
  os << "\n";
  return os.str();
}

ButcherTableau make_tableau(RKFamily family, int s) {
  if (s < 1) throw UnsupportedStageCount("stage count must be >= 1");
  if (family == RKFamily::LobattoIIIC && s < 2)
    throw UnsupportedStageCount("LobattoIIIC needs s >= 2");

  ButcherTableau t;
  t.s = s;
  t.family = family;

  std::vector<double> nodes;
  switch (family) {
    case RKFamily::Gauss:
      nodes = real_roots(shifted_legendre(s));
      t.order = 2 * s;
      break;
    case RKFamily::RadauIIA:
      // Right Radau nodes: roots of Pt_{s-1} - Pt_s (includes x = 1).
      nodes = real_roots(poly_sub(shifted_legendre(s - 1), shifted_legendre(s)));
      t.order = 2 * s - 1;
      break;
    case RKFamily::LobattoIIIC: {
      nodes = real_roots(poly_derivative(shifted_legendre(s - 1)));
      nodes.insert(nodes.begin(), 0.0);
      nodes.push_back(1.0);
      t.order = 2 * s - 2;
      break;
    }
  }
  if (int(nodes.size()) != s) throw SingularTableau("node count mismatch");

  t.c = Eigen::Map<Eigen::VectorXd>(nodes.data(), s);
  t.b = quadrature_weights(t.c);
  t.A = Eigen::MatrixXd::Zero(s, s);
  if (family == RKFamily::LobattoIIIC) {
    for (int i = 0; i < s; ++i) t.A(i, 0) = t.b[0];
    solve_collocation_rows(t.c, 1, t.A);
  } else {
    solve_collocation_rows(t.c, 0, t.A);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t.A);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin > 1e12)
    throw SingularTableau("constructed A is numerically singular");
  return t;
}

OrderReport check_order_conditions(const ButcherTableau& t, int up_to) {
  const auto& trees = rooted_trees();
  const int cap = std::min(up_to, 6);
  const int s = t.s;

  std::vector<Eigen::VectorXd> phi(trees.size());
  double worst = 0.0;
  for (size_t i = 0; i < trees.size(); ++i) {
    const auto& tr = trees[i];
    if (tr.order > cap) break;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(s);
    for (int k : tr.kids) v = v.cwiseProduct((t.A * phi[k]).eval());
    phi[i] = v;
    worst = std::max(worst, std::abs(t.b.dot(v) - 1.0 / tr.gamma));
  }

  OrderReport rep;
  rep.max_residual = worst;
  rep.stiffly_accurate = t.stiffly_accurate();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t.A);
  rep.min_singular_value_A = svd.singularValues().minCoeff();
  return rep;
}

double scalar_ode_error(const ButcherTableau& t, double lambda, int n) {
  const double h = 1.0 / double(n);
  const int s = t.s;
  const Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(s, s) - h * lambda * t.A;
  const auto lu = lhs.fullPivLu();
  double y = 1.0;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd Y = lu.solve(Eigen::VectorXd::Constant(s, lambda * y));
    y += h * t.b.dot(Y);
  }
  return std::abs(y - std::exp(lambda));
}

}  // namespace irkns
