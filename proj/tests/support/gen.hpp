#ifndef TESTS_SUPPORT_GEN_HPP
#define TESTS_SUPPORT_GEN_HPP

// Random valid-term generation and brute-force oracles shared by the unit
// and acceptance suites.  Seeded deterministically; override with the
// BANGBOX_SEED environment variable.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bang/boxops.hpp"
#include "bang/canon.hpp"
#include "bang/term.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline std::uint64_t seed_from_env(std::uint64_t fallback) {
  if (const char* s = std::getenv("BANGBOX_SEED"))
    return std::strtoull(s, nullptr, 10);
  return fallback;
}

inline int pick(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

/// Builds random well-formed terms constructively: a !-box forest, atoms
/// placed at its nodes, and edges added through patterns that respect the
/// context conditions by construction (same-level bound pairs, pairs crossing
/// box walls through groups, pairs sharing an edge context, free edges plain
/// or grouped).
class TermGen {
 public:
  explicit TermGen(Rng& rng) : rng_(rng) {}

  bang::Tensor operator()() {
    for (int attempt = 0; attempt < 8; ++attempt) {
      build();
      auto vr = bang::validate(assemble());
      if (vr.ok()) return *vr.tensor;
    }
    throw std::logic_error("term generator produced no valid term");
  }

 private:
  struct Node {            // node 0 is the product root, others are !-boxes
    std::string name;      // empty for the root
    int parent = 0;
    std::vector<int> children;
  };
  struct AtomSlot {
    int node = 0;
    std::string symbol;
    bang::EdgeTerm edges;
  };

  Rng& rng_;
  std::vector<Node> nodes_;
  std::vector<AtomSlot> atoms_;
  int next_edge_ = 1;

  static const char* symbol_for(size_t i) {
    static const char* names[] = {"phi", "psi", "xi", "zeta", "omega", "rho"};
    return names[i % 6];
  }

  std::string new_edge() { return "e" + std::to_string(next_edge_++); }

  int depth(int n) const {
    int d = 0;
    while (n != 0) {
      n = nodes_[n].parent;
      ++d;
    }
    return d;
  }

  int new_atom(int node) {
    atoms_.push_back({node, symbol_for(atoms_.size()), {}});
    return int(atoms_.size()) - 1;
  }

  // an atom at the given node, reusing an existing one most of the time
  int atom_at(int node) {
    std::vector<int> here;
    for (size_t i = 0; i < atoms_.size(); ++i)
      if (atoms_[i].node == node) here.push_back(int(i));
    if (!here.empty() && !chance(rng_, 0.3)) return here[pick(rng_, 0, int(here.size()) - 1)];
    return new_atom(node);
  }

  // inside-out box path starting at a child of its eventual host node
  std::vector<int> box_path() {
    int b = pick(rng_, 1, int(nodes_.size()) - 1);
    std::vector<int> path{b};
    while (!nodes_[path.front()].children.empty() && chance(rng_, 0.4)) {
      const auto& ch = nodes_[path.front()].children;
      path.insert(path.begin(), ch[pick(rng_, 0, int(ch.size()) - 1)]);
    }
    return path;  // innermost first; host node = parent of path.back()
  }

  // wraps a directed edge in the group chain for the given path
  bang::EdgeItem grouped(bang::Dir d, const std::string& name,
                         const std::vector<int>& path) {
    bang::EdgeItem item = bang::edge(d, name);
    for (int b : path)
      item = bang::group(chance(rng_, 0.5), nodes_[b].name,
                         bang::EdgeTerm{{item}});
    return item;
  }

  void add_free_plain() {
    auto& a = atoms_[atom_at(pick(rng_, 0, int(nodes_.size()) - 1))];
    a.edges.items.push_back(
        bang::edge(chance(rng_, 0.5) ? bang::Dir::Out : bang::Dir::In, new_edge()));
  }

  void add_free_grouped() {
    if (nodes_.size() == 1) return add_free_plain();
    auto path = box_path();
    auto& a = atoms_[atom_at(nodes_[path.back()].parent)];
    a.edges.items.push_back(grouped(
        chance(rng_, 0.5) ? bang::Dir::Out : bang::Dir::In, new_edge(), path));
  }

  void add_bound_same_node() {
    int node = pick(rng_, 0, int(nodes_.size()) - 1);
    std::string x = new_edge();
    atoms_[atom_at(node)].edges.items.push_back(bang::edge(bang::Dir::Out, x));
    atoms_[atom_at(node)].edges.items.push_back(bang::edge(bang::Dir::In, x));
  }

  void add_bound_crossing() {
    if (nodes_.size() == 1) return add_bound_same_node();
    auto path = box_path();
    std::string x = new_edge();
    bool out_outside = chance(rng_, 0.5);
    auto& outer = atoms_[atom_at(nodes_[path.back()].parent)];
    outer.edges.items.push_back(grouped(
        out_outside ? bang::Dir::Out : bang::Dir::In, x, path));
    auto& inner = atoms_[atom_at(path.front())];
    inner.edges.items.push_back(
        bang::edge(out_outside ? bang::Dir::In : bang::Dir::Out, x));
  }

  void add_bound_shared_ectx() {
    if (nodes_.size() == 1) return add_bound_same_node();
    int b = pick(rng_, 1, int(nodes_.size()) - 1);
    int host = nodes_[b].parent;
    std::string x = new_edge();
    atoms_[atom_at(host)].edges.items.push_back(
        bang::group(true, nodes_[b].name,
                    bang::EdgeTerm{{bang::edge(bang::Dir::Out, x)}}));
    atoms_[atom_at(host)].edges.items.push_back(
        bang::group(false, nodes_[b].name,
                    bang::EdgeTerm{{bang::edge(bang::Dir::In, x)}}));
  }

  void add_idwire() {
    // free on both ends; canonicalization keeps it
    bang::Factor f = bang::idwire(new_edge(), new_edge());
    wires_.push_back({pick(rng_, 0, int(nodes_.size()) - 1), f});
  }

  std::vector<std::pair<int, bang::Factor>> wires_;

  void build() {
    nodes_.assign(1, Node{});
    atoms_.clear();
    wires_.clear();
    next_edge_ = 1;

    int nboxes = pick(rng_, 0, 3);
    for (int i = 0; i < nboxes; ++i) {
      int parent = pick(rng_, 0, int(nodes_.size()) - 1);
      if (depth(parent) >= 2) parent = 0;
      nodes_.push_back({"K" + std::to_string(i + 1), parent, {}});
      nodes_[parent].children.push_back(int(nodes_.size()) - 1);
    }

    int natoms = pick(rng_, 1, 3);
    for (int i = 0; i < natoms; ++i) new_atom(pick(rng_, 0, int(nodes_.size()) - 1));

    int nfeatures = pick(rng_, 1, 6);
    for (int i = 0; i < nfeatures; ++i) {
      switch (pick(rng_, 0, 5)) {
        case 0: add_free_plain(); break;
        case 1: add_free_grouped(); break;
        case 2: add_bound_same_node(); break;
        case 3: add_bound_crossing(); break;
        case 4: add_bound_shared_ectx(); break;
        case 5: add_idwire(); break;
      }
    }
  }

  bang::PreTensor assemble_node(int node) {
    std::vector<bang::Factor> fs;
    for (const auto& a : atoms_)
      if (a.node == node) fs.push_back(bang::atom(a.symbol, a.edges));
    for (const auto& [n, f] : wires_)
      if (n == node) fs.push_back(f);
    for (int c : nodes_[node].children)
      fs.push_back(bang::bangbox(nodes_[c].name, assemble_node(c)));
    std::shuffle(fs.begin(), fs.end(), rng_);
    return bang::PreTensor{std::move(fs)};
  }

  bang::PreTensor assemble() {
    return bang::normalize_pretensor(assemble_node(0));
  }
};

inline bang::Tensor random_term(Rng& rng) { return TermGen(rng)(); }

/// Random applicable operation on t, or nullopt if t is box-free.
inline std::optional<bang::OpStep> random_op(Rng& rng, const bang::Tensor& t) {
  if (t.boxes().empty()) return std::nullopt;
  std::vector<std::string> bs(t.boxes().begin(), t.boxes().end());
  bang::OpStep st;
  st.box = bs[pick(rng, 0, int(bs.size()) - 1)];
  switch (pick(rng, 0, 4)) {
    case 0: st.kind = bang::OpKind::Kill; break;
    case 1: st.kind = bang::OpKind::Drop; break;
    case 2: st.kind = bang::OpKind::Exp; break;
    case 3: st.kind = bang::OpKind::Copy; break;
    default: {
      st.kind = bang::OpKind::Weak;
      if (!chance(rng, 0.2)) {
        auto used = bang::edge_names(t.term());
        for (const auto& b : bang::box_names(t.term())) used.insert(b);
        std::string w = bang::fresh_name("w", used);
        st.payload.factors.push_back(bang::atom(
            "omega", bang::EdgeTerm{{bang::edge(bang::Dir::Out, w)}}));
      }
      break;
    }
  }
  return st;
}

/// All box-free instances reachable with at most max_exp expansions per box,
/// by unpruned search over every kill/exp choice at every box, deduplicated
/// by iso key.  Independent of enumerate_instances' ordering strategy.
inline void brute_instances_go(const bang::Tensor& cur,
                               std::map<std::string, int> budget,
                               std::set<std::string>& out,
                               const bang::Signature& sig) {
  if (cur.boxes().empty()) {
    out.insert(bang::iso_key(cur));
    return;
  }
  for (const auto& b : cur.boxes()) {
    brute_instances_go(bang::kill_box(cur, b, sig), budget, out, sig);
    int r = budget.count(b) ? budget.at(b) : 0;
    if (r > 0) {
      bang::OpStep st{bang::OpKind::Exp, b, {}, {}};
      bang::OpStep done;
      bang::Tensor nxt = bang::apply_op(cur, st, sig, &done);
      auto bud = budget;
      bud[b] = r - 1;
      for (const auto& [from, to] : done.fresh.boxes) bud[to] = r - 1;
      brute_instances_go(nxt, bud, out, sig);
    }
  }
}

inline std::set<std::string> brute_instances(const bang::Tensor& t, int max_exp,
                                             const bang::Signature& sig = {}) {
  std::map<std::string, int> budget;
  for (const auto& b : t.boxes()) budget[b] = max_exp;
  std::set<std::string> out;
  brute_instances_go(t, budget, out, sig);
  return out;
}

}  // namespace gen

#endif  // TESTS_SUPPORT_GEN_HPP
