#ifndef BANG_TERM_HPP
#define BANG_TERM_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace bang {

/// Direction of an edge end: Out is written `+a`, In is written `-a`.
enum class Dir { Out, In };

struct DirEdge {
  Dir dir;
  std::string name;

  friend bool operator==(const DirEdge&, const DirEdge&) = default;
  friend auto operator<=>(const DirEdge&, const DirEdge&) = default;
};

struct EdgeItem;

/// Ordered sequence of directed edges and nested !-box edge groups.
/// Stored normalized: no empty groups, concatenation flattened.
struct EdgeTerm {
  std::vector<EdgeItem> items;

  friend bool operator==(const EdgeTerm&, const EdgeTerm&);
};

/// A group of edges entering a !-box, `[e>A` (clockwise) or `<e]A`
/// (anticlockwise). The direction decides on which side fresh copies
/// are inserted when the box is expanded.
struct EdgeGroup {
  bool clockwise = true;
  std::string box;
  EdgeTerm body;

  friend bool operator==(const EdgeGroup&, const EdgeGroup&) = default;
};

struct EdgeItem {
  std::variant<DirEdge, EdgeGroup> v;

  friend bool operator==(const EdgeItem&, const EdgeItem&) = default;
};

struct Factor;

/// Purely syntactic product of factors; the empty list is the unit tensor 1.
/// May violate the well-formedness conditions F1-F2/C1-C3.
struct PreTensor {
  std::vector<Factor> factors;

  friend bool operator==(const PreTensor&, const PreTensor&);
};

struct Atom {
  std::string symbol;
  EdgeTerm edges;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// The identity wire 1_{a^ b_}, written `id(+a -b)`.
struct IdWire {
  std::string out;
  std::string in;

  friend bool operator==(const IdWire&, const IdWire&) = default;
};

/// Closed loop of identity wires; contributes a scalar factor d in models.
struct Circle {
  friend bool operator==(const Circle&, const Circle&) = default;
};

struct BangBox {
  std::string box;
  PreTensor body;

  friend bool operator==(const BangBox&, const BangBox&) = default;
};

struct Factor {
  std::variant<Atom, IdWire, Circle, BangBox> v;

  friend bool operator==(const Factor&, const Factor&) = default;
};

// -- convenience constructors ------------------------------------------------

inline EdgeItem edge(Dir d, std::string name) {
  return EdgeItem{DirEdge{d, std::move(name)}};
}
inline EdgeItem group(bool cw, std::string box, EdgeTerm body) {
  return EdgeItem{EdgeGroup{cw, std::move(box), std::move(body)}};
}
inline Factor atom(std::string sym, EdgeTerm e) {
  return Factor{Atom{std::move(sym), std::move(e)}};
}
inline Factor idwire(std::string out, std::string in) {
  return Factor{IdWire{std::move(out), std::move(in)}};
}
inline Factor bangbox(std::string box, PreTensor body) {
  return Factor{BangBox{std::move(box), std::move(body)}};
}

/// Drops empty groups and flattens; quotients by the edgeterm equivalences.
EdgeTerm normalize_edgeterm(const EdgeTerm& e);
PreTensor normalize_pretensor(const PreTensor& p);

// -- signature ---------------------------------------------------------------

/// Arity spec of a symbol: variable, or a fixed arrangement word over {^,v}
/// where ^ is an output and v an input.
struct AritySpec {
  bool variable = true;
  std::string arrangement;  // meaningful when !variable
};

struct Signature {
  std::map<std::string, AritySpec> symbols;

  /// Unknown symbols default to variable arity.
  AritySpec lookup(const std::string& sym) const {
    auto it = symbols.find(sym);
    return it == symbols.end() ? AritySpec{} : it->second;
  }
};

/// Arrangement word of a box-free edgeterm (^ per Out, v per In).
std::string arrangement_of(const EdgeTerm& e);

// -- validation --------------------------------------------------------------

enum class Cond { F1, F2, C1, C2, C3, NS, Sig };

std::string to_string(Cond c);

struct Violation {
  Cond cond;
  std::string subject;  // offending edge or box name
  std::string message;
};

/// Edge context and node context of one directed-edge occurrence,
/// both listed inside-out.
struct Contexts {
  std::vector<std::string> ectx;
  std::vector<std::string> nctx;

  std::vector<std::string> ctx() const {
    auto r = ectx;
    r.insert(r.end(), nctx.begin(), nctx.end());
    return r;
  }

  friend bool operator==(const Contexts&, const Contexts&) = default;
};

struct ValidationResult;

/// A validated !-tensor expression. Immutable; construct via validate().
class Tensor {
 public:
  const PreTensor& term() const { return term_; }

  /// Directed edges whose name occurs exactly once.
  const std::vector<DirEdge>& free_edges() const { return free_edges_; }
  const std::vector<std::string>& bound_names() const { return bound_names_; }
  const std::set<std::string>& boxes() const { return boxes_; }

  /// Direct-enclosure parent map of the !-box nesting forest.
  const std::map<std::string, std::string>& box_parent() const {
    return parent_;
  }

  bool has_edge(const DirEdge& e) const { return contexts_.count(e) != 0; }
  const Contexts& contexts(const DirEdge& e) const;
  const std::map<DirEdge, Contexts>& all_contexts() const { return contexts_; }

  bool box_free() const { return boxes_.empty(); }

  friend ValidationResult validate(const PreTensor&, const Signature&);

 private:
  Tensor() = default;

  PreTensor term_;
  std::vector<DirEdge> free_edges_;      // sorted
  std::vector<std::string> bound_names_; // sorted
  std::set<std::string> boxes_;
  std::map<std::string, std::string> parent_;
  std::map<DirEdge, Contexts> contexts_;
};

struct ValidationResult {
  std::optional<Tensor> tensor;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

ValidationResult validate(const PreTensor& p, const Signature& sig = {});

/// Shorthand: validate and throw std::runtime_error on failure.
Tensor must_validate(const PreTensor& p, const Signature& sig = {});

inline std::vector<DirEdge> free_edges(const Tensor& t) {
  return t.free_edges();
}
inline Contexts contexts(const Tensor& t, const DirEdge& e) {
  return t.contexts(e);
}

// -- C3 witness --------------------------------------------------------------

struct C3Witness {
  std::vector<std::string> es;
  std::vector<std::string> bs;
};

/// Minimal witness lists (es, bs) solving both C3 concatenation equations
/// for a bound pair, or nullopt when no witness exists.
std::optional<C3Witness> c3_witness(const Contexts& out_ctx,
                                    const Contexts& in_ctx);
std::optional<C3Witness> c3_witness(const Tensor& t, const std::string& pair);

// -- renaming and product ----------------------------------------------------

/// Injective renaming of free edge names and !-box names.
struct NameMap {
  std::map<std::string, std::string> edges;
  std::map<std::string, std::string> boxes;

  bool empty() const { return edges.empty() && boxes.empty(); }
  std::string map_edge(const std::string& n) const {
    auto it = edges.find(n);
    return it == edges.end() ? n : it->second;
  }
  std::string map_box(const std::string& n) const {
    auto it = boxes.find(n);
    return it == boxes.end() ? n : it->second;
  }
};

/// Applies a NameMap to every name occurrence (no freeness check).
PreTensor rename_all(const PreTensor& p, const NameMap& m);
EdgeTerm rename_all(const EdgeTerm& e, const NameMap& m);

/// Renames free edge/box names; throws on non-free domain entries or on
/// renames that would introduce F1/F2 clashes.
Tensor rename_free(const Tensor& t, const NameMap& m,
                   const Signature& sig = {});

/// Concatenates the factor lists and revalidates; repeated names across the
/// operands become bound.
ValidationResult product(const Tensor& g, const Tensor& h,
                         const Signature& sig = {});

/// All edge names (free and bound) occurring in a term.
std::set<std::string> edge_names(const PreTensor& p);
std::set<std::string> box_names(const PreTensor& p);

}  // namespace bang

#endif  // BANG_TERM_HPP
