#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uilab/error.hpp"
#include "uilab/formula.hpp"

namespace uilab {

inline constexpr double kAtomSumTolerance = 1e-12;
inline constexpr double kPartitionSumTolerance = 1e-9;

/// Exact probability vector over the 2^n truth assignments of a space.
class JointDistribution {
 public:
  /// Validates non-negativity and normalization (within 1e-12).
  JointDistribution(PropositionSpace space, std::vector<double> atoms)
      : space_(std::move(space)), atoms_(std::move(atoms)) {
    if (atoms_.size() != space_.atom_count())
      throw InvalidArgument("expected " + std::to_string(space_.atom_count()) + " atoms, got " +
                            std::to_string(atoms_.size()));
    double total = 0.0;
    for (double a : atoms_) {
      if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("atom probabilities must be finite and >= 0");
      total += a;
    }
    if (std::abs(total - 1.0) > kAtomSumTolerance)
      throw InvalidArgument("atoms sum to " + std::to_string(total) + ", not 1");
  }

  static JointDistribution uniform(PropositionSpace space) {
    const std::size_t m = space.atom_count();
    return JointDistribution(std::move(space), std::vector<double>(m, 1.0 / static_cast<double>(m)));
  }

  /// Scales non-negative weights to sum to one.
  static JointDistribution normalized(PropositionSpace space, std::vector<double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw InvalidArgument("weights must have positive total");
    for (auto& w : weights) w /= total;
    return JointDistribution(std::move(space), std::move(weights));
  }

  const PropositionSpace& space() const noexcept { return space_; }
  std::span<const double> atoms() const noexcept { return atoms_; }
  double atom(std::size_t k) const { return atoms_.at(k); }

  friend bool operator==(const JointDistribution&, const JointDistribution&) = default;

 private:
  PropositionSpace space_;
  std::vector<double> atoms_;
};

inline double mass(std::span<const double> atoms, const EventMask& mask) {
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k)
    if (mask[k]) total += atoms[k];
  return total;
}

inline double probability(const JointDistribution& dist, const Formula& f) {
  return std::min(1.0, mass(dist.atoms(), truth_table(dist.space(), f)));
}

inline double conditional_probability(const JointDistribution& dist, const Formula& target,
                                      const Formula& given) {
  const EventMask g = truth_table(dist.space(), given);
  const EventMask t = truth_table(dist.space(), target);
  double pg = 0.0, ptg = 0.0;
  const auto atoms = dist.atoms();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (!g[k]) continue;
    pg += atoms[k];
    if (t[k]) ptg += atoms[k];
  }
  if (!(pg > 0.0)) throw ZeroConditioningEvent(to_string(given));
  return std::min(1.0, ptg / pg);
}

/// Exclusive, exhaustive set of cells with target probabilities.
class EventPartition {
 public:
  struct Cell {
    Formula event;
    double target;
  };

  /// Verifies exclusivity and exhaustiveness by atom enumeration.
  EventPartition(const PropositionSpace& space, std::vector<Cell> cells) : cells_(std::move(cells)) {
    if (cells_.empty()) throw InvalidPartition("partition has no cells");
    double total = 0.0;
    for (const auto& c : cells_) {
      if (!(c.target >= 0.0)) throw InvalidPartition("cell targets must be >= 0");
      total += c.target;
    }
    if (std::abs(total - 1.0) > kPartitionSumTolerance)
      throw InvalidPartition("cell targets sum to " + std::to_string(total) + ", not 1");
    for (auto& c : cells_) c.target /= total;

    std::vector<std::uint8_t> covered(space.atom_count(), 0);
    masks_.reserve(cells_.size());
    for (const auto& c : cells_) {
      masks_.push_back(truth_table(space, c.event));
      const auto& mask = masks_.back();
      for (std::size_t k = 0; k < covered.size(); ++k) {
        if (!mask[k]) continue;
        if (covered[k]) throw NotExclusive("partition cells overlap at atom " + std::to_string(k));
        covered[k] = 1;
      }
    }
    for (std::size_t k = 0; k < covered.size(); ++k)
      if (!covered[k]) throw InvalidPartition("partition cells do not cover atom " + std::to_string(k));
  }

  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const std::vector<EventMask>& masks() const noexcept { return masks_; }

 private:
  std::vector<Cell> cells_;
  std::vector<EventMask> masks_;
};

namespace detail {

// In-place Jeffrey scaling on raw atoms. `masks` must partition the atoms.
inline void jeffrey_scale(std::vector<double>& atoms, std::span<const EventMask> masks,
                          std::span<const double> targets, std::span<const Formula> events) {
  std::vector<double> factor(masks.size());
  for (std::size_t c = 0; c < masks.size(); ++c) {
    const double prior = mass(atoms, masks[c]);
    if (targets[c] > 0.0 && !(prior > 0.0)) throw ZeroPriorCell(to_string(events[c]));
    factor[c] = targets[c] > 0.0 ? targets[c] / prior : 0.0;
  }
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    for (std::size_t c = 0; c < masks.size(); ++c) {
      if (masks[c][k]) {
        atoms[k] *= factor[c];
        break;
      }
    }
  }
}

}  // namespace detail

/// Jeffrey's rule: each cell gets its target mass; within-cell conditionals
/// are preserved.
inline JointDistribution jeffrey_update(const JointDistribution& dist, const EventPartition& partition) {
  std::vector<double> atoms(dist.atoms().begin(), dist.atoms().end());
  std::vector<double> targets;
  std::vector<Formula> events;
  for (const auto& c : partition.cells()) {
    targets.push_back(c.target);
    events.push_back(c.event);
  }
  detail::jeffrey_scale(atoms, partition.masks(), targets, events);
  return JointDistribution::normalized(dist.space(), std::move(atoms));
}

/// Completes mutually exclusive cells with their complement carrying the
/// remaining probability.
inline EventPartition extend_nonexhaustive(const PropositionSpace& space,
                                           std::vector<EventPartition::Cell> cells) {
  if (cells.empty()) throw InvalidPartition("no cells given");
  double total = 0.0;
  std::vector<Formula> events;
  for (const auto& c : cells) {
    total += c.target;
    events.push_back(c.event);
  }
  std::vector<std::uint8_t> covered(space.atom_count(), 0);
  for (const auto& e : events) {
    const EventMask mask = truth_table(space, e);
    for (std::size_t k = 0; k < covered.size(); ++k) {
      if (!mask[k]) continue;
      if (covered[k]) throw NotExclusive("cells overlap at atom " + std::to_string(k));
      covered[k] = 1;
    }
  }
  if (total > 1.0 + kAtomSumTolerance)
    throw InvalidPartition("cell targets sum to " + std::to_string(total) + ", more than 1");
  Formula rest = events.size() == 1 ? Formula::negate(events.front())
                                    : Formula::negate(Formula::disj(events));
  cells.push_back({rest, std::max(0.0, 1.0 - total)});
  return EventPartition(space, std::move(cells));
}

/// Shannon entropy in nats, with 0 ln 0 = 0.
inline double entropy(const JointDistribution& dist) {
  double h = 0.0;
  for (double a : dist.atoms())
    if (a > 0.0) h -= a * std::log(a);
  return h;
}

/// KL(dist || reference) in nats.
inline double kl_divergence(const JointDistribution& dist, const JointDistribution& reference) {
  if (!(dist.space() == reference.space())) throw InvalidArgument("distributions are over different spaces");
  double kl = 0.0;
  for (std::size_t k = 0; k < dist.atoms().size(); ++k) {
    const double p = dist.atom(k);
    if (p <= 0.0) continue;
    const double q = reference.atom(k);
    if (!(q > 0.0)) throw AbsoluteContinuityViolation(k);
    kl += p * std::log(p / q);
  }
  return std::max(0.0, kl);
}

}  // namespace uilab
