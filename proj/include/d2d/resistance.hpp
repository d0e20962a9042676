#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace d2d {

/// sign * g(tau) * exp(-resistance / tau) with g an opaque sub-exponential
/// factor. Only the resistance takes part in the algebra.
struct ResistanceTerm {
  std::string tag;
  double resistance = 0.0;
  int sign = +1;
};

/// Thrown when a rule cannot determine the resistance (equal-resistance
/// difference, inverse of a sum).
class UndefinedResistance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Finite sum of terms. The expression is asymptotically positive: every term
/// at the minimum resistance carries a positive sign.
class ResistanceExpr {
 public:
  ResistanceExpr() = default;
  explicit ResistanceExpr(std::vector<ResistanceTerm> terms);

  const std::vector<ResistanceTerm>& terms() const { return terms_; }
  /// Minimum term resistance.
  double resistance() const;

 private:
  std::vector<ResistanceTerm> terms_;
};

/// kappa > 0 constant: resistance 0.
ResistanceExpr res_of_const(double kappa = 1.0);
/// exp(-kappa / tau): resistance kappa.
ResistanceExpr res_of_exp(double kappa);
ResistanceExpr res_add(const ResistanceExpr& a, const ResistanceExpr& b);
/// a - b; defined only when Res(a) < Res(b).
ResistanceExpr res_sub(const ResistanceExpr& a, const ResistanceExpr& b);
ResistanceExpr res_mul(const ResistanceExpr& a, const ResistanceExpr& b);
/// 1 / a for a single-term expression with non-zero resistance.
ResistanceExpr res_inv(const ResistanceExpr& a);

}  // namespace d2d
