#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uilab/error.hpp"

namespace uilab {

/// Change-in-belief value in [-1, 1]: +1 certainly true, -1 certainly false,
/// 0 no change from the prior.
class CertaintyFactor {
 public:
  constexpr CertaintyFactor() = default;

  /// Values within 1e-12 of the range are clamped; anything further throws.
  explicit CertaintyFactor(double v) {
    if (!(std::abs(v) <= 1.0 + 1e-12)) throw InvalidArgument("certainty factor outside [-1, 1]");
    value_ = std::clamp(v, -1.0, 1.0);
  }

  constexpr double value() const noexcept { return value_; }
  CertaintyFactor operator-() const { return CertaintyFactor(-value_); }

  friend constexpr auto operator<=>(CertaintyFactor, CertaintyFactor) = default;

 private:
  double value_ = 0.0;
};

enum class UISKind { MYC, TSM, CI };

inline std::string_view to_string(UISKind k) {
  switch (k) {
    case UISKind::MYC: return "myc";
    case UISKind::TSM: return "tsm";
    case UISKind::CI: return "ci";
  }
  return "?";
}

inline UISKind parse_uis(std::string_view s) {
  if (s == "myc" || s == "MYC") return UISKind::MYC;
  if (s == "tsm" || s == "TSM") return UISKind::TSM;
  if (s == "ci" || s == "CI") return UISKind::CI;
  throw InvalidArgument("unknown inference system '" + std::string(s) + "'");
}

namespace detail {
inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
}
}  // namespace detail

// CF <-> probability, piecewise linear through (-1, 0), (0, p0), (+1, 1).

inline double prob_from_cf(CertaintyFactor cf, double p0) {
  detail::check_probability(p0, "prior");
  const double c = cf.value();
  const double p = c >= 0.0 ? p0 + c * (1.0 - p0) : p0 * (1.0 + c);
  return std::clamp(p, 0.0, 1.0);
}

inline CertaintyFactor cf_from_probs(double p1, double p0) {
  detail::check_probability(p1, "posterior");
  detail::check_probability(p0, "prior");
  if (p1 == p0) return CertaintyFactor(0.0);
  if (p1 > p0) {
    if (p0 >= 1.0) throw DegenerateAnchor("cannot raise a probability anchored at 1");
    return CertaintyFactor((p1 - p0) / (1.0 - p0));
  }
  if (p0 <= 0.0) throw DegenerateAnchor("cannot lower a probability anchored at 0");
  return CertaintyFactor((p1 - p0) / p0);
}

inline CertaintyFactor cf_and(std::span<const CertaintyFactor> cfs) {
  if (cfs.empty()) throw InvalidArgument("cf_and of an empty list");
  return *std::min_element(cfs.begin(), cfs.end());
}

inline CertaintyFactor cf_or(std::span<const CertaintyFactor> cfs) {
  if (cfs.empty()) throw InvalidArgument("cf_or of an empty list");
  return *std::max_element(cfs.begin(), cfs.end());
}

inline CertaintyFactor cf_and(std::initializer_list<CertaintyFactor> cfs) {
  return cf_and(std::span<const CertaintyFactor>(cfs.begin(), cfs.size()));
}
inline CertaintyFactor cf_or(std::initializer_list<CertaintyFactor> cfs) {
  return cf_or(std::span<const CertaintyFactor>(cfs.begin(), cfs.size()));
}

inline CertaintyFactor cf_not(CertaintyFactor cf) { return -cf; }

/// MYCIN modus ponens: no response to disconfirmed antecedents.
inline CertaintyFactor myc_modus_ponens(CertaintyFactor rule, CertaintyFactor antecedent) {
  if (antecedent.value() < 0.0) return CertaintyFactor(0.0);
  return CertaintyFactor(rule.value() * antecedent.value());
}

/// Two-sided modus ponens. With no lower strength the negative side mirrors
/// the upper strength.
inline CertaintyFactor tsm_modus_ponens(CertaintyFactor upper, std::optional<CertaintyFactor> lower,
                                        CertaintyFactor antecedent) {
  const double a = antecedent.value();
  if (a >= 0.0) return CertaintyFactor(upper.value() * a);
  const double r = lower ? lower->value() * -a : -upper.value() * -a;
  return CertaintyFactor(std::clamp(r, -1.0, 1.0));
}

/// Parallel combination of two rule results bearing on one consequent.
inline CertaintyFactor combine_parallel(CertaintyFactor x, CertaintyFactor y) {
  const double a = x.value(), b = y.value();
  double z;
  if (a >= 0.0 && b >= 0.0) {
    z = a + b - a * b;
  } else if (a <= 0.0 && b <= 0.0) {
    z = a + b + a * b;
  } else {
    const double m = std::min(std::abs(a), std::abs(b));
    if (m >= 1.0) throw ContradictoryCertainty();
    z = (a + b) / (1.0 - m);
  }
  return CertaintyFactor(std::clamp(z, -1.0, 1.0));
}

/// Likelihoods of one antecedent term given the consequent and its negation.
struct CILikelihood {
  std::string term;
  double given_true;   // p0(term | C)
  double given_false;  // p0(term | !C)
};

struct CIParameters {
  double prior;  // p0(C)
  std::vector<CILikelihood> factors;

  double term_prior(const CILikelihood& f) const {
    return f.given_true * prior + f.given_false * (1.0 - prior);
  }
};

/// Conditional-independence odds update with uncertain evidence. Terms
/// missing from `posteriors` stay at their prior probability.
inline double ci_update(const CIParameters& params, const std::map<std::string, double, std::less<>>& posteriors) {
  detail::check_probability(params.prior, "consequent prior");
  double num = 1.0, den = 1.0;
  for (const auto& f : params.factors) {
    detail::check_probability(f.given_true, "likelihood");
    detail::check_probability(f.given_false, "likelihood");
    auto it = posteriors.find(f.term);
    const double a = it != posteriors.end() ? it->second : params.term_prior(f);
    detail::check_probability(a, "term posterior");
    const double n = f.given_true * a + (1.0 - f.given_true) * (1.0 - a);
    const double d = f.given_false * a + (1.0 - f.given_false) * (1.0 - a);
    if (!(d > 0.0)) throw ZeroDenominator("likelihood factor for '" + f.term + "' has a zero denominator");
    num *= n;
    den *= d;
  }
  // odds = p0/(1-p0) * num/den, written to stay finite at p0 = 1.
  const double top = params.prior * num;
  const double bottom = (1.0 - params.prior) * den;
  if (top + bottom <= 0.0) return params.prior;
  return top / (top + bottom);
}

}  // namespace uilab
