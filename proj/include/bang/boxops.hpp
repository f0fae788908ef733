#ifndef BANG_BOXOPS_HPP
#define BANG_BOXOPS_HPP

#include <optional>
#include <string>
#include <vector>

#include "bang/term.hpp"

namespace bang {

/// Explicit, finite freshness function: injective renamings for the edge and
/// box names copied by Exp/Copy. Entries not supplied are generated on demand
/// with the `name.k` scheme (smallest k avoiding every name in use).
struct FreshMap {
  std::map<std::string, std::string> edges;
  std::map<std::string, std::string> boxes;

  bool empty() const { return edges.empty() && boxes.empty(); }

  friend bool operator==(const FreshMap&, const FreshMap&) = default;
};

/// Smallest `base.k` (k = 1, 2, ...) not contained in used; inserts the
/// result into used.
std::string fresh_name(const std::string& base, std::set<std::string>& used);

/// Edge and box names within the scope of box B: its body plus the bodies of
/// every B-group. These are exactly the names an Exp/Copy of B duplicates.
void scope_names(const PreTensor& p, const std::string& box,
                 std::set<std::string>& edges_out,
                 std::set<std::string>& boxes_out);

/// Extends fr to cover the whole scope of B (plus B itself when with_box),
/// drawing default images that avoid `used`, the term's names, and each
/// other. Throws if an explicit image clashes or the map is not injective.
FreshMap complete_fresh(const FreshMap& fr, const PreTensor& term,
                        const std::string& box, bool with_box,
                        std::set<std::string> used = {});

enum class OpKind { Kill, Drop, Exp, Copy, Weak };

std::string to_string(OpKind k);

/// One !-box operation. `fresh` is meaningful for Exp/Copy (may be partial),
/// `payload` for Weak.
struct OpStep {
  OpKind kind = OpKind::Kill;
  std::string box;
  FreshMap fresh;
  PreTensor payload;
};

using OpSeq = std::vector<OpStep>;

std::string to_string(const OpStep& s);
std::string to_string(const OpSeq& s);

/// Parses one serialized step, e.g. `exp A (a->a1, c->c1)`, `kill A`,
/// `copy A (A->A1)`, `drop A`, `weaken A { phi(+a) }`.
OpStep parse_op_step(const std::string& line);
OpSeq parse_op_seq(const std::string& text);  // one step per line

// Each operation validates its result and throws std::runtime_error on an
// unknown box or a well-formedness violation. When `completed` is non-null
// it receives the fully explicit freshness function actually used.
Tensor kill_box(const Tensor& t, const std::string& box,
                const Signature& sig = {});
Tensor drop_box(const Tensor& t, const std::string& box,
                const Signature& sig = {});
Tensor expand_box(const Tensor& t, const std::string& box,
                  const FreshMap& fr = {}, const Signature& sig = {},
                  FreshMap* completed = nullptr);
Tensor copy_box(const Tensor& t, const std::string& box,
                const FreshMap& fr = {}, const Signature& sig = {},
                FreshMap* completed = nullptr);
Tensor weaken_box(const Tensor& t, const std::string& box,
                  const PreTensor& payload, const Signature& sig = {});

Tensor apply_op(const Tensor& t, const OpStep& step, const Signature& sig = {},
                OpStep* completed = nullptr);

/// Folds the steps left to right; errors are rethrown tagged with the
/// 1-based step index.
Tensor apply_ops(const Tensor& t, const OpSeq& ops, const Signature& sig = {});

/// A concrete instance together with the Kill/Exp sequence producing it.
struct Instance {
  Tensor tensor;
  OpSeq ops;
};

/// All box-free instances reachable with at most max_exp expansions per box
/// (fresh boxes inherit the remaining budget of the box they were copied
/// from), deduplicated up to free-name/box-name bijection and returned in a
/// deterministic order.
std::vector<Instance> enumerate_instances_ops(const Tensor& t, int max_exp,
                                              const Signature& sig = {});
std::vector<Tensor> enumerate_instances(const Tensor& t, int max_exp,
                                        const Signature& sig = {});

/// Reorders ops into the normal form of the commutation theorems: operations
/// on outer boxes first (top-level boxes by name, then their children,
/// recursively), rewriting nested pairs with the induced operation on the
/// fresh copy. apply_ops over the result agrees with the original up to a
/// free-name/box-name bijection.
OpSeq normalize_ops(const Tensor& t, const OpSeq& ops,
                    const Signature& sig = {});

}  // namespace bang

#endif  // BANG_BOXOPS_HPP
