#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbdt/engine.hpp"

namespace gbdt {

/// Generator record for the initial potential.
struct PotentialSpec {
  enum class Kind { ConstantJ, UnitaryList, RandomUnitary, ExplicitC };
  Kind kind = Kind::ConstantJ;
  std::vector<ComplexMatrix> matrices;  // unitary-list / explicit-c-list payload
  std::uint64_t seed = 0;               // random-unitary payload
};

struct RunSpec {
  int steps = 1;
  std::optional<std::vector<Complex>> z_grid;  // nullopt = auto
  std::optional<std::vector<double>> t_grid;   // nullopt = auto
  Tolerance tol;
};

/// Fully validated problem document.
struct ProblemSpec {
  SignatureSpec signature;
  PotentialSpec potential;
  GbdtTriple triple;
  RunSpec run;

  /// Builds the initial potential with exactly `steps` steps; list-backed
  /// generators must supply at least that many.
  DiracPotential materialize_potential(int steps) const;
};

ProblemSpec parse_problem(const std::filesystem::path& path);
ProblemSpec parse_problem_text(const std::string& text, const std::string& origin);

/// Canonical JSON echo of a ProblemSpec; parse_problem_text of the serialized
/// echo reproduces an equal spec.
nlohmann::ordered_json problem_echo(const ProblemSpec& spec);

nlohmann::ordered_json complex_to_json(Complex z);
nlohmann::ordered_json matrix_to_json(const ComplexMatrix& m);

}  // namespace gbdt
