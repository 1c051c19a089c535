#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace irkns {

enum class RKFamily { RadauIIA, Gauss, LobattoIIIC };

const char* family_name(RKFamily f);
RKFamily family_from_name(std::string_view name);

// Butcher array (c, A, b) of an s-stage implicit Runge-Kutta method.
struct ButcherTableau {
  int s = 0;
  Eigen::MatrixXd A;  // s x s
  Eigen::VectorXd b;  // s
  Eigen::VectorXd c;  // s, entries in [0, 1]
  RKFamily family = RKFamily::RadauIIA;
  int order = 0;  // classical order: 2s-1 / 2s / 2s-2 per family

  bool stiffly_accurate(double tol = 1e-13) const;
  std::string to_string() const;
};

// Construct a tableau from collocation nodes (polynomial roots) and the
// C(s)/B(s) simplifying conditions. Tested range is s = 1..5 (s >= 2 for
// Lobatto IIIC); larger s is constructed the same way but not validated.
ButcherTableau make_tableau(RKFamily family, int s);

struct OrderReport {
  double max_residual = 0.0;       // rooted-tree conditions up to `up_to`
  bool stiffly_accurate = false;   // a_{s,j} == b_j
  double min_singular_value_A = 0.0;
};

// Evaluates every rooted-tree order condition b . phi(tau) = 1/gamma(tau)
// of order <= up_to and reports the largest residual. Trees are enumerated
// up to order 6; higher classical orders are validated empirically via
// step-halving instead.
OrderReport check_order_conditions(const ButcherTableau& t, int up_to);

// Integrates y' = lambda*y over [0,1] with n steps; used for observed-order
// checks of the integrator itself.
double scalar_ode_error(const ButcherTableau& t, double lambda, int n);

}  // namespace irkns
