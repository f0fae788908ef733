#ifndef BANG_CALCULUS_HPP
#define BANG_CALCULUS_HPP

#include <optional>
#include <string>
#include <vector>

#include "bang/boxops.hpp"
#include "bang/syntax.hpp"
#include "bang/term.hpp"

namespace bang {

/// An equation between !-tensors with compatible boundaries: identical free
/// edges, identical box sets with the same nesting, and identical contexts
/// for every free edge.
struct Equation {
  Tensor lhs;
  Tensor rhs;
};

/// Empty iff the pair forms a valid Equation; otherwise one message per
/// offending edge or box.
std::vector<std::string> boundary_violations(const Tensor& lhs,
                                             const Tensor& rhs);

/// Throws std::runtime_error listing the violations.
Equation check_equation(const Tensor& lhs, const Tensor& rhs);

struct Theory {
  Signature sig;
  std::vector<std::pair<std::string, Equation>> axioms;

  const Equation* find(const std::string& name) const;
  void add(const std::string& name, Equation e);
};

/// Builds a theory from a parsed .bt file: non-lemma rules become axioms,
/// lemma equations are returned through `lemmas` (same validation).
Theory make_theory(const TheoryFile& tf,
                   std::vector<std::pair<std::string, Equation>>* lemmas);

/// Applies one !-box operation to both sides with a single shared freshness
/// function (completed over the union of both scopes).
Equation eq_op(const Equation& e, const OpStep& step, const Signature& sig = {},
               OpStep* completed = nullptr);

// The congruence rules. Each result is checked to be a valid Equation.
Equation derive_prod(const Equation& e, const Tensor& k,
                     const Signature& sig = {});  // G K = H K
Equation derive_prod2(const Equation& e, const Tensor& k,
                      const Signature& sig = {});  // K G = K H
Equation derive_box(const Equation& e, const std::string& box,
                    const Signature& sig = {});
Equation derive_rename(const Equation& e, const NameMap& m,
                       const Signature& sig = {});
Equation derive_weaken(const Equation& e, const std::string& box,
                       const PreTensor& payload, const Signature& sig = {});
/// The stronger rule: weaken the two sides with the two sides of a proved
/// payload equation.
Equation derive_weaken2(const Equation& e, const std::string& box,
                        const Equation& payload, const Signature& sig = {});

/// Location of a rewrite occurrence: the !-box path from the root to the
/// product level, and the factor positions within it.
struct Occurrence {
  std::vector<std::string> path;
  std::vector<size_t> indices;
};

/// Everything needed to replay one rule application deterministically.
struct MatchCert {
  std::string rule;
  bool reverse = false;
  OpSeq prep;                // !-box operations applied to the rule equation
  NameMap rename;            // free renaming applied to the rule equation
  std::vector<std::pair<std::string, PreTensor>> weakenings;
  Occurrence at;
  NameMap binding;           // prepared rule names -> target names
};

struct MatchLimits {
  size_t max_matches = 64;
};

/// All occurrences of the prepared rule side in t, leftmost-innermost order.
std::vector<MatchCert> find_matches(
    const Tensor& t, const Theory& th, const std::string& rule, bool reverse,
    const OpSeq& prep = {}, const NameMap& rename = {},
    const std::vector<std::pair<std::string, PreTensor>>& weakenings = {},
    const MatchLimits& limits = {});

/// Replays the certificate: re-verifies the occurrence and substitutes the
/// opposite side. Throws if the certificate does not replay.
Tensor rewrite(const Tensor& t, const Theory& th, const MatchCert& cert);

// -- proof scripts -----------------------------------------------------------

struct StepRef {
  std::string rule;
  bool reverse = false;
  std::optional<size_t> at;
  OpSeq ops;
  NameMap rename;
  std::vector<std::pair<std::string, PreTensor>> weakenings;
  int line = 0;
};

struct ProofBody {
  std::vector<StepRef> steps;
  int line = 0;
};

struct ProofScript {
  std::string lemma;
  bool induction = false;
  std::string box;
  ProofBody body;  // direct proofs
  ProofBody base;  // induction proofs
  ProofBody step;
  int line = 0;
};

/// Parses a .btp file. Throws ParseError with the offending line.
std::vector<ProofScript> parse_proof_file(const std::string& text);

enum class Verdict {
  Proved,
  Failed,
  BaseFailed,
  StepFailed,
  FixedBoxViolation,
};

std::string to_string(Verdict v);

struct LemmaReport {
  std::string lemma;
  Verdict verdict = Verdict::Failed;
  std::string message;
  int line = 0;
};

struct ProofReport {
  std::vector<LemmaReport> lemmas;

  bool all_proved() const;
};

/// Runs a rewrite body from goal.lhs towards goal.rhs inside th. When
/// fixed_box is set the body may cite `ih`, whose preparatory operations must
/// not Exp/Kill/Drop/Copy that box; a violation is reported distinctly.
struct BodyResult {
  bool ok = false;
  bool fixed_box_violation = false;
  std::string message;
  int line = 0;
};
BodyResult run_proof_body(const Theory& th, const Equation& goal,
                          const ProofBody& body,
                          const std::optional<std::string>& fixed_box = {},
                          const Equation* ih = nullptr);

/// !-box induction: base = Kill_box(goal) proved in th, step =
/// Exp_box(goal) proved in th + ih with the box held fixed.
LemmaReport check_induction(const Theory& th, const std::string& lemma,
                            const Equation& goal, const std::string& box,
                            const ProofBody& base, const ProofBody& step);

/// Checks every script against the theory; lemmas proved earlier become
/// rules for later scripts.
ProofReport run_proof_scripts(const TheoryFile& tf,
                              const std::vector<ProofScript>& scripts);

}  // namespace bang

#endif  // BANG_CALCULUS_HPP
