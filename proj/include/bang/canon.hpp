#ifndef BANG_CANON_HPP
#define BANG_CANON_HPP

#include <optional>
#include <string>

#include "bang/term.hpp"

namespace bang {

/// The representative of t's ≡-class whose printed form is lexicographically
/// minimal over factor orderings and systematic bound-name assignment
/// (b1, b2, ... in discovery order). Identity wires with a bound end are
/// contracted; closed wire cycles normalize to `circle`. Idempotent.
Tensor canonical_form(const Tensor& t, const Signature& sig = {});

/// print_tensor(canonical_form(t)) without rebuilding the Tensor.
std::string canonical_print(const Tensor& t);

/// Syntactic equivalence ≡: bound renaming, product associativity /
/// commutativity / unit, identity-wire contraction, edgeterm equivalences.
bool equiv(const Tensor& g, const Tensor& h);

/// Canonical print with free edge names and !-box names also systematically
/// renamed; equal keys mean equal up to a free-name/box-name bijection.
std::string iso_key(const Tensor& t);

/// Bijection on free edge names and !-box names making equiv hold,
/// or nullopt if none exists.
std::optional<NameMap> equiv_upto_renaming(const Tensor& g, const Tensor& h);

/// Contracts identity wires with a bound end (per the identity laws) and
/// turns closed wire loops into `circle` factors. Used by canonical_form;
/// exposed for tests.
PreTensor contract_wires(const PreTensor& p);

}  // namespace bang

#endif  // BANG_CANON_HPP
