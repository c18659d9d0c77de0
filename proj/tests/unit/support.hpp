#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uilab/joint.hpp"

namespace uilab::test {

// Atoms in index order: bit 0 = A1, bit 1 = A2.
inline JointDistribution table31_prior() {
  return JointDistribution(PropositionSpace({"A1", "A2"}), {1.0 / 9, 7.0 / 18, 7.0 / 18, 1.0 / 9});
}

inline JointDistribution random_distribution(const PropositionSpace& space, std::mt19937_64& rng,
                                             double floor = 0.0) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  std::vector<double> w(space.atom_count());
  for (auto& x : w) x = u(rng);
  return JointDistribution::normalized(space, std::move(w));
}

// Random formula over the first `n` names of `space`.
inline Formula random_formula(const PropositionSpace& space, std::mt19937_64& rng, int depth = 3) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 3);
  std::uniform_int_distribution<std::size_t> prop(0, space.size() - 1);
  switch (pick(rng)) {
    case 0: return Formula::atom(space.name(prop(rng)));
    case 1: return !random_formula(space, rng, depth - 1);
    case 2: return random_formula(space, rng, depth - 1) & random_formula(space, rng, depth - 1);
    default: return random_formula(space, rng, depth - 1) | random_formula(space, rng, depth - 1);
  }
}

inline std::string fixture_path(const std::string& name) { return std::string(UILAB_FIXTURE_DIR) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace uilab::test
