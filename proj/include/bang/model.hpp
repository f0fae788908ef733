#ifndef BANG_MODEL_HPP
#define BANG_MODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bang/calculus.hpp"
#include "bang/term.hpp"

namespace bang {

/// Dense interpretation over Z_p: every symbol/arrangement pair names an
/// array of shape d^|arrangement|, row-major, first index slowest.
struct Model {
  int d = 1;
  std::int64_t p = 5;
  std::map<std::pair<std::string, std::string>, std::vector<std::int64_t>>
      entries;

  const std::vector<std::int64_t>* lookup(const std::string& symbol,
                                          const std::string& arrangement) const;
};

/// Parses the JSON model schema:
///   { "d": 2, "p": 5,
///     "symbols": { "m": { "vv^": [[[1,0],[0,1]],[[0,1],[1,0]]] } } }
/// Arrays may be nested to the declared shape or flat, row-major either way.
Model load_model(const std::string& json_text);

struct EvalResult {
  std::vector<DirEdge> order;        // index order of the array
  std::vector<std::int64_t> array;   // shape d^order.size(), circles included
  std::int64_t circle_factor = 1;    // d^(#circle factors) mod p

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

/// Sum over all assignments of bound names of the product of atom entries;
/// identity wires contribute Kronecker deltas, each circle a factor d.
/// Bound names are eliminated one at a time in canonical order.
EvalResult evaluate(const Tensor& t, const Model& m,
                    const std::vector<DirEdge>& order);

/// Same contract as evaluate, via direct enumeration of every index
/// assignment. Test oracle only.
EvalResult naive_contract(const Tensor& t, const Model& m,
                          const std::vector<DirEdge>& order);

struct ModelVerdict {
  bool ok = true;
  std::string message;       // first counterexample, if any
  size_t instances_checked = 0;
};

/// Enumerates the instances of e (Kill/Exp on both sides with one shared
/// freshness function, at most max_exp expansions per box) and compares the
/// two evaluations on every instance.
ModelVerdict check_rule_in_model(const Equation& e, const Model& m, int max_exp,
                                 const Signature& sig = {});

}  // namespace bang

#endif  // BANG_MODEL_HPP
