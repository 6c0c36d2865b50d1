#pragma once

// Brute-force protocol engine driven by line-oriented .qps scripts. It only
// composes quantum-core and jc-dynamics primitives.
//
// The state is kept as an ensemble of unnormalized pure components; the
// density matrix is the sum of their projectors.

#include "cqed/jc_dynamics.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cqed::oracle {

struct ModeDecl {
  std::size_t n_min = 0;
  std::size_t n_max = 1;
  bool windowed = false;  // declared with `window` rather than `truncation`
  bool operator==(const ModeDecl&) const = default;
};

struct SystemDecl {
  std::size_t atoms = 0;
  std::vector<ModeDecl> modes;
  double lambda_t_max = kDefaultLambdaTMax;
  bool explicit_lt_max = false;
  bool operator==(const SystemDecl&) const = default;
};

/// An atom (1-based in scripts, 0-based here) or a mode (letter in scripts).
struct Ref {
  bool is_mode = false;
  std::size_t index = 0;
  bool operator==(const Ref&) const = default;
};

struct PreparePair {  // alpha|ee> + sqrt(1-alpha^2)|gg>
  std::size_t atom_a = 0, atom_b = 0;
  double alpha = 0.0;
  bool operator==(const PreparePair&) const = default;
};
struct PrepareAtoms {
  std::vector<std::size_t> atoms;
  std::vector<Complex> amplitudes;  // 2^atoms entries, first atom most significant
  bool operator==(const PrepareAtoms&) const = default;
};
struct PrepareBell {  // weights of Phi+, Phi-, Psi+, Psi-
  std::size_t atom_a = 0, atom_b = 0;
  std::array<double, 4> weights{};
  bool operator==(const PrepareBell&) const = default;
};
struct PrepareCavity {
  std::size_t mode = 0;
  std::size_t photons = 0;
  bool operator==(const PrepareCavity&) const = default;
};
struct Interact {
  std::size_t atom = 0, mode = 0;
  double lambda_t = 0.0;
  bool operator==(const Interact&) const = default;
};
enum class Axis { kX, kY, kZ };
struct Rotate {
  Axis axis = Axis::kZ;
  std::size_t atom = 0;
  double angle = 0.0;
  bool operator==(const Rotate&) const = default;
};
enum class Basis { kZ, kX, kPm };
struct MeasureAtom {
  std::size_t atom = 0;
  Basis basis = Basis::kZ;
  bool first_outcome = true;  // e for z, plus for x/pm
  bool operator==(const MeasureAtom&) const = default;
};
struct MeasureCavity {
  std::size_t mode = 0;
  std::size_t photons = 0;
  bool operator==(const MeasureCavity&) const = default;
};
struct TraceOut {
  std::vector<Ref> refs;
  bool operator==(const TraceOut&) const = default;
};

using StepKind = std::variant<PreparePair, PrepareAtoms, PrepareBell, PrepareCavity, Interact,
                              Rotate, MeasureAtom, MeasureCavity, TraceOut>;

struct Step {
  StepKind kind;
  std::size_t line = 0;  // source line, 0 when built in code; ignored by ==
  bool operator==(const Step& other) const { return kind == other.kind; }
};

struct Protocol {
  SystemDecl system;
  std::vector<Step> steps;
  bool operator==(const Protocol&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

/// Parses and validates a script: keywords, ranges, outcome labels, references
/// to traced factors, lt-max, and the truncation rule (every passage must keep
/// the reachable photon numbers inside each mode's window). A given
/// `lambda_t_max` replaces the script's lt-max declaration.
Protocol parse_script(std::string_view text,
                      std::optional<double> lambda_t_max = std::nullopt);

/// Validates a Protocol built in code with the same rules as the parser;
/// throws ParseError with the step's line (or its 1-based position).
void validate(const Protocol& protocol);

/// Canonical script text; parse_script(print_script(p)) == p.
std::string print_script(const Protocol& protocol);

std::string describe(const Step& step);
std::string ref_label(const Ref& ref);

struct StepLog {
  std::size_t step = 0;  // 0-based
  std::string description;
  bool is_measurement = false;
  double probability = 1.0;
};

struct RunResult {
  MixedState final_state;
  std::vector<PureState> components;  // unnormalized; sum of projectors = final_state
  std::vector<Ref> factors;           // remaining factors in state order
  double joint_probability = 1.0;
  std::vector<StepLog> log;
};

/// Executes the protocol from all atoms in g and every mode at n_min.
/// Throws EmptyBranchError when a post-selection has probability < 1e-14.
RunResult run(const Protocol& protocol);

}  // namespace cqed::oracle
