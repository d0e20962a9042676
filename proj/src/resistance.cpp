#include "d2d/resistance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace d2d {

ResistanceExpr::ResistanceExpr(std::vector<ResistanceTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("resistance expression needs at least one term");
  for (const auto& t : terms_) {
    if (!std::isfinite(t.resistance)) throw std::invalid_argument("term resistance must be finite");
    if (t.sign != 1 && t.sign != -1) throw std::invalid_argument("term sign must be +1 or -1");
  }
  const double r = resistance();
  for (const auto& t : terms_)
    if (t.resistance == r && t.sign < 0)
      throw UndefinedResistance("leading term is negative; the expression is not a positive function");
}

double ResistanceExpr::resistance() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) r = std::min(r, t.resistance);
  return r;
}

ResistanceExpr res_of_const(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("constant must be positive");
  return ResistanceExpr({{"const", 0.0, +1}});
}

ResistanceExpr res_of_exp(double kappa) { return ResistanceExpr({{"exp", kappa, +1}}); }

ResistanceExpr res_add(const ResistanceExpr& a, const ResistanceExpr& b) {
  std::vector<ResistanceTerm> t = a.terms();
  t.insert(t.end(), b.terms().begin(), b.terms().end());
  return ResistanceExpr(std::move(t));
}

ResistanceExpr res_sub(const ResistanceExpr& a, const ResistanceExpr& b) {
  const double ra = a.resistance(), rb = b.resistance();
  if (ra == rb) throw UndefinedResistance("difference of two functions with equal resistance");
  if (ra > rb) throw UndefinedResistance("difference is eventually negative");
  std::vector<ResistanceTerm> t = a.terms();
  for (ResistanceTerm term : b.terms()) {
    term.sign = -term.sign;
    t.push_back(std::move(term));
  }
  return ResistanceExpr(std::move(t));
}

ResistanceExpr res_mul(const ResistanceExpr& a, const ResistanceExpr& b) {
  std::vector<ResistanceTerm> t;
  t.reserve(a.terms().size() * b.terms().size());
  for (const auto& x : a.terms())
    for (const auto& y : b.terms()) t.push_back({"(" + x.tag + "*" + y.tag + ")", x.resistance + y.resistance, x.sign * y.sign});
  return ResistanceExpr(std::move(t));
}

ResistanceExpr res_inv(const ResistanceExpr& a) {
  if (a.terms().size() != 1) throw UndefinedResistance("inverse is defined for single-term expressions only");
  const ResistanceTerm& t = a.terms().front();
  if (t.resistance == 0.0) throw UndefinedResistance("inverse requires a non-zero resistance");
  return ResistanceExpr({{"1/" + t.tag, -t.resistance, +1}});
}

}  // namespace d2d
