#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uilab/error.hpp"
#include "uilab/formula.hpp"
#include "uilab/joint.hpp"

namespace uilab {

/// Marginal p(target) = value, or conditional p(target | given) = value.
struct Constraint {
  enum class Kind { Marginal, Conditional };

  Kind kind;
  Formula target;
  std::optional<Formula> given;
  double value;

  static Constraint marginal(Formula target, double value) {
    check_value(value);
    return {Kind::Marginal, std::move(target), std::nullopt, value};
  }

  static Constraint conditional(Formula target, Formula given, double value) {
    check_value(value);
    return {Kind::Conditional, std::move(target), std::move(given), value};
  }

  std::string label() const {
    if (kind == Kind::Marginal) return "p(" + to_string(target) + ")";
    return "p(" + to_string(target) + " | " + to_string(*given) + ")";
  }

  friend bool operator==(const Constraint& a, const Constraint& b) {
    return a.kind == b.kind && a.target == b.target && a.given == b.given && a.value == b.value;
  }

 private:
  static void check_value(double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("constraint value must lie in [0, 1]");
  }
};

struct FitReport {
  std::size_t iterations = 0;
  double max_residual = 0.0;
  bool converged = false;
};

struct FitOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 10000;
};

struct FitResult {
  JointDistribution distribution;
  FitReport report;
};

/// Constraint cycling exhausted its budget; usually means the constraints are
/// infeasible.
class NotConverged : public Error {
 public:
  explicit NotConverged(FitReport report)
      : Error("IPFP did not converge after " + std::to_string(report.iterations) +
              " cycles (max residual " + std::to_string(report.max_residual) + ")"),
        report_(report) {}
  const FitReport& report() const noexcept { return report_; }

 private:
  FitReport report_;
};

namespace detail {

struct CompiledConstraint {
  Constraint::Kind kind;
  EventMask target;  // for conditionals: target & given
  EventMask given;   // empty for marginals
  double value;
  std::string label;
};

inline CompiledConstraint compile(const PropositionSpace& space, const Constraint& c) {
  CompiledConstraint cc{c.kind, truth_table(space, c.target), {}, c.value, c.label()};
  if (c.kind == Constraint::Kind::Conditional) {
    cc.given = truth_table(space, *c.given);
    for (std::size_t k = 0; k < cc.target.size(); ++k) cc.target[k] &= cc.given[k];
  }
  return cc;
}

inline std::vector<CompiledConstraint> compile(const PropositionSpace& space,
                                               std::span<const Constraint> constraints) {
  std::vector<CompiledConstraint> out;
  out.reserve(constraints.size());
  for (const auto& c : constraints) out.push_back(compile(space, c));
  return out;
}

inline void project(std::vector<double>& atoms, const CompiledConstraint& c) {
  const double v = c.value;
  if (c.kind == Constraint::Kind::Marginal) {
    double in = 0.0, out = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) (c.target[k] ? in : out) += atoms[k];
    if (v > 0.0 && !(in > 0.0)) throw ZeroPriorCell(c.label);
    if (v < 1.0 && !(out > 0.0)) throw ZeroPriorCell("not " + c.label);
    const double fin = v > 0.0 ? v / in : 0.0;
    const double fout = v < 1.0 ? (1.0 - v) / out : 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) atoms[k] *= c.target[k] ? fin : fout;
    return;
  }
  // Three cells: target&given, !target&given, !given. The I-projection onto
  // p(target&given) = v p(given) tilts the first two cells by exp(lambda(1-v))
  // and exp(-lambda v), with exp(lambda) = v miss / ((1-v) hit); every cell
  // keeps its internal proportions, so this is a Jeffrey update whose cell
  // masses are the tilted ones.
  double hit = 0.0, miss = 0.0, rest = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (!c.given[k]) {
      rest += atoms[k];
      continue;
    }
    (c.target[k] ? hit : miss) += atoms[k];
  }
  if (!(hit + miss > 0.0)) throw ZeroConditioningEvent(c.label);
  if (v > 0.0 && !(hit > 0.0)) throw ZeroPriorCell(c.label);
  if (v < 1.0 && !(miss > 0.0)) throw ZeroPriorCell("not " + c.label);
  double fhit = 1.0, fmiss = 1.0, frest = 1.0;
  if (v == 1.0) {
    fmiss = 0.0;
  } else if (v == 0.0) {
    fhit = 0.0;
  } else {
    const double lambda = std::log(v) + std::log(miss) - std::log1p(-v) - std::log(hit);
    const double eh = lambda * (1.0 - v), em = -lambda * v;
    const double top = std::max({eh, em, 0.0});
    fhit = std::exp(eh - top);
    fmiss = std::exp(em - top);
    frest = std::exp(-top);
  }
  const double total = hit * fhit + miss * fmiss + rest * frest;
  fhit /= total;
  fmiss /= total;
  frest /= total;
  for (std::size_t k = 0; k < atoms.size(); ++k) atoms[k] *= !c.given[k] ? frest : c.target[k] ? fhit : fmiss;
}

inline double residual(std::span<const double> atoms, const CompiledConstraint& c) {
  if (c.kind == Constraint::Kind::Marginal) return std::abs(mass(atoms, c.target) - c.value);
  const double pg = mass(atoms, c.given);
  if (!(pg > 0.0)) return 1.0;
  return std::abs(mass(atoms, c.target) / pg - c.value);
}

inline double residual(std::span<const double> atoms, std::span<const CompiledConstraint> cs) {
  double r = 0.0;
  for (const auto& c : cs) r = std::max(r, residual(atoms, c));
  return r;
}

}  // namespace detail

/// One Jeffrey projection onto a single constraint.
inline JointDistribution project(const JointDistribution& dist, const Constraint& c) {
  std::vector<double> atoms(dist.atoms().begin(), dist.atoms().end());
  detail::project(atoms, detail::compile(dist.space(), c));
  return JointDistribution::normalized(dist.space(), std::move(atoms));
}

/// Largest |achieved - target| over the constraints. A conditional whose
/// given event has zero probability contributes 1.
inline double residual(const JointDistribution& dist, std::span<const Constraint> constraints) {
  return detail::residual(dist.atoms(), detail::compile(dist.space(), constraints));
}

/// Minimum cross-entropy update by iterated proportional fitting: cycles
/// Jeffrey projections over the constraints until the residual is within
/// tolerance. Throws NotConverged when the cycle budget runs out.
inline FitResult mxe_update(const JointDistribution& prior, std::span<const Constraint> constraints,
                            const FitOptions& options = {}) {
  if (!(options.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  const auto compiled = detail::compile(prior.space(), constraints);
  std::vector<double> atoms(prior.atoms().begin(), prior.atoms().end());
  FitReport report;
  report.max_residual = detail::residual(atoms, compiled);
  while (report.iterations < options.max_iterations) {
    for (const auto& c : compiled) detail::project(atoms, c);
    ++report.iterations;
    report.max_residual = detail::residual(atoms, compiled);
    if (report.max_residual <= options.tolerance) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged) throw NotConverged(report);
  return {JointDistribution::normalized(prior.space(), std::move(atoms)), report};
}

inline FitResult mxe_update(const JointDistribution& prior, std::initializer_list<Constraint> constraints,
                            const FitOptions& options = {}) {
  return mxe_update(prior, std::span<const Constraint>(constraints.begin(), constraints.size()), options);
}

/// Maximum-entropy distribution under the constraints: MXE from uniform.
inline FitResult fit_max_entropy_prior(const PropositionSpace& space, std::span<const Constraint> constraints,
                                       const FitOptions& options = {}) {
  return mxe_update(JointDistribution::uniform(space), constraints, options);
}

inline FitResult fit_max_entropy_prior(const PropositionSpace& space,
                                       std::initializer_list<Constraint> constraints,
                                       const FitOptions& options = {}) {
  return fit_max_entropy_prior(space, std::span<const Constraint>(constraints.begin(), constraints.size()),
                               options);
}

}  // namespace uilab
