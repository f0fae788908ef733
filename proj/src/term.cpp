#include "bang/term.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace bang {

bool operator==(const EdgeTerm& a, const EdgeTerm& b) {
  return a.items == b.items;
}
bool operator==(const PreTensor& a, const PreTensor& b) {
  return a.factors == b.factors;
}

std::string to_string(Cond c) {
  switch (c) {
    case Cond::F1: return "F1";
    case Cond::F2: return "F2";
    case Cond::C1: return "C1";
    case Cond::C2: return "C2";
    case Cond::C3: return "C3";
    case Cond::NS: return "NS";
    case Cond::Sig: return "Sig";
  }
  return "?";
}

EdgeTerm normalize_edgeterm(const EdgeTerm& e) {
  EdgeTerm out;
  for (const auto& item : e.items) {
    if (const auto* g = std::get_if<EdgeGroup>(&item.v)) {
      EdgeTerm body = normalize_edgeterm(g->body);
      if (body.items.empty()) continue;  // [eps>A == eps
      out.items.push_back(group(g->clockwise, g->box, std::move(body)));
    } else {
      out.items.push_back(item);
    }
  }
  return out;
}

PreTensor normalize_pretensor(const PreTensor& p) {
  PreTensor out;
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      out.factors.push_back(atom(a->symbol, normalize_edgeterm(a->edges)));
    } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
      out.factors.push_back(bangbox(b->box, normalize_pretensor(b->body)));
    } else {
      out.factors.push_back(f);
    }
  }
  return out;
}

std::string arrangement_of(const EdgeTerm& e) {
  std::string w;
  for (const auto& item : e.items) {
    const auto* d = std::get_if<DirEdge>(&item.v);
    if (!d) return "";  // not box-free; caller must check
    w.push_back(d->dir == Dir::Out ? '^' : 'v');
  }
  return w;
}

namespace {

struct Occurrence {
  Contexts ctx;
  int count = 0;
};

struct Walk {
  std::map<DirEdge, Occurrence> edges;
  std::map<std::string, int> box_count;
  std::map<std::string, std::string> parent;  // box -> enclosing box
  std::set<std::string> boxes;
  std::set<std::string> group_markers;
  bool any_group = false;

  void edgeterm(const EdgeTerm& e, std::vector<std::string>& estack,
                const std::vector<std::string>& nctx) {
    for (const auto& item : e.items) {
      if (const auto* d = std::get_if<DirEdge>(&item.v)) {
        auto& occ = edges[*d];
        occ.count++;
        if (occ.count == 1) {
          // inside-out: innermost group first
          occ.ctx.ectx.assign(estack.rbegin(), estack.rend());
          occ.ctx.nctx = nctx;
        }
      } else {
        const auto& g = std::get<EdgeGroup>(item.v);
        any_group = true;
        group_markers.insert(g.box);
        estack.push_back(g.box);
        edgeterm(g.body, estack, nctx);
        estack.pop_back();
      }
    }
  }

  void pretensor(const PreTensor& p, std::vector<std::string>& nstack) {
    for (const auto& f : p.factors) {
      if (const auto* a = std::get_if<Atom>(&f.v)) {
        std::vector<std::string> estack;
        std::vector<std::string> nctx(nstack.rbegin(), nstack.rend());
        edgeterm(a->edges, estack, nctx);
      } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
        std::vector<std::string> nctx(nstack.rbegin(), nstack.rend());
        for (DirEdge d : {DirEdge{Dir::Out, w->out}, DirEdge{Dir::In, w->in}}) {
          auto& occ = edges[d];
          occ.count++;
          if (occ.count == 1) occ.ctx.nctx = nctx;
        }
      } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
        box_count[b->box]++;
        boxes.insert(b->box);
        if (!nstack.empty()) parent[b->box] = nstack.back();
        nstack.push_back(b->box);
        pretensor(b->body, nstack);
        nstack.pop_back();
      }
      // Circle carries no names.
    }
  }
};

}  // namespace

ValidationResult validate(const PreTensor& raw, const Signature& sig) {
  ValidationResult res;
  PreTensor p = normalize_pretensor(raw);

  Walk w;
  std::vector<std::string> nstack;
  w.pretensor(p, nstack);

  auto bad = [&](Cond c, const std::string& subj, std::string msg) {
    res.violations.push_back({c, subj, std::move(msg)});
  };

  // F1: each directed edge at most once.
  for (const auto& [d, occ] : w.edges) {
    if (occ.count > 1)
      bad(Cond::F1, d.name,
          std::string(d.dir == Dir::Out ? "+" : "-") + d.name + " occurs " +
              std::to_string(occ.count) + " times");
  }
  // F2: each box name labels at most one !-box.
  for (const auto& [b, n] : w.box_count)
    if (n > 1) bad(Cond::F2, b, "!-box " + b + " declared " +
                                    std::to_string(n) + " times");

  // Disjoint namespaces within one term.
  for (const auto& [d, occ] : w.edges) {
    (void)occ;
    if (w.boxes.count(d.name) || w.group_markers.count(d.name))
      bad(Cond::NS, d.name, "name " + d.name + " used as both edge and !-box");
  }

  // C1 + C2 per occurrence.
  for (const auto& [d, occ] : w.edges) {
    const auto& e = occ.ctx.ectx;
    const auto& n = occ.ctx.nctx;
    for (const auto& b : e)
      if (std::find(n.begin(), n.end(), b) != n.end()) {
        bad(Cond::C1, d.name, "box " + b + " in both ectx and nctx of " + d.name);
        break;
      }
    // C2: every box in the edge context exists and the full context
    // (ectx then nctx) is a direct-nesting chain. The chain over the whole
    // context is needed for the !-box operations to preserve validity.
    bool c2ok = true;
    for (const auto& b : e)
      if (!w.boxes.count(b)) {
        bad(Cond::C2, d.name, "edge context of " + d.name +
                                  " names unknown !-box " + b);
        c2ok = false;
      }
    if (c2ok && !e.empty()) {
      auto chain = occ.ctx.ctx();
      for (size_t i = 0; c2ok && i < chain.size(); ++i) {
        auto it = w.parent.find(chain[i]);
        const std::string* par =
            it == w.parent.end() ? nullptr : &it->second;
        if (i + 1 < chain.size()) {
          if (!par || *par != chain[i + 1]) c2ok = false;
        } else if (par) {
          c2ok = false;
        }
      }
      if (!c2ok)
        bad(Cond::C2, d.name,
            "context of " + d.name + " is not a direct-nesting chain");
    }
  }

  // C3 per bound pair.
  for (const auto& [d, occ] : w.edges) {
    if (d.dir != Dir::Out) continue;
    auto in_it = w.edges.find(DirEdge{Dir::In, d.name});
    if (in_it == w.edges.end()) continue;
    if (occ.count != 1 || in_it->second.count != 1) continue;  // F1 already
    if (!c3_witness(occ.ctx, in_it->second.ctx))
      bad(Cond::C3, d.name, "bound pair " + d.name +
                                " has incompatible contexts");
  }

  // Fixed arities are only checkable once the term is box-free.
  if (w.boxes.empty() && !w.any_group) {
    std::function<void(const PreTensor&)> check = [&](const PreTensor& q) {
      for (const auto& f : q.factors)
        if (const auto* a = std::get_if<Atom>(&f.v)) {
          auto spec = sig.lookup(a->symbol);
          if (!spec.variable && arrangement_of(a->edges) != spec.arrangement)
            bad(Cond::Sig, a->symbol,
                "atom " + a->symbol + " has arrangement '" +
                    arrangement_of(a->edges) + "', declared '" +
                    spec.arrangement + "'");
        }
    };
    check(p);
  }

  if (!res.violations.empty()) return res;

  Tensor t;
  t.term_ = std::move(p);
  t.boxes_ = std::move(w.boxes);
  t.parent_ = std::move(w.parent);
  for (const auto& [d, occ] : w.edges) {
    t.contexts_[d] = occ.ctx;
    bool bound = w.edges.count(DirEdge{d.dir == Dir::Out ? Dir::In : Dir::Out,
                                       d.name}) != 0;
    if (!bound)
      t.free_edges_.push_back(d);
    else if (d.dir == Dir::Out)
      t.bound_names_.push_back(d.name);
  }
  std::sort(t.free_edges_.begin(), t.free_edges_.end());
  std::sort(t.bound_names_.begin(), t.bound_names_.end());
  res.tensor = std::move(t);
  return res;
}

Tensor must_validate(const PreTensor& p, const Signature& sig) {
  auto r = validate(p, sig);
  if (!r.ok()) {
    std::string msg = "invalid !-tensor:";
    for (const auto& v : r.violations)
      msg += " [" + to_string(v.cond) + "] " + v.message + ";";
    throw std::runtime_error(msg);
  }
  return *std::move(r.tensor);
}

const Contexts& Tensor::contexts(const DirEdge& e) const {
  auto it = contexts_.find(e);
  if (it == contexts_.end())
    throw std::runtime_error("edge not found: " + e.name);
  return it->second;
}

// -- C3 witness search -------------------------------------------------------

namespace {

// Unifies es ++ mid == pre ++ bs positionally, where es and bs are cell
// arrays shared between the two equations. Cells hold either a concrete
// name or an equivalence-class id resolved by union-find over cells.
struct CellSolver {
  // cell ids: 0..ne-1 for es, ne..ne+nb-1 for bs
  std::vector<int> up;
  std::vector<std::string> val;  // "" = unassigned

  explicit CellSolver(size_t n) : up(n), val(n) {
    for (size_t i = 0; i < n; ++i) up[i] = static_cast<int>(i);
  }
  int find(int x) { return up[x] == x ? x : up[x] = find(up[x]); }
  bool assign(int x, const std::string& s) {
    x = find(x);
    if (val[x].empty()) { val[x] = s; return true; }
    return val[x] == s;
  }
  bool merge(int x, int y) {
    x = find(x); y = find(y);
    if (x == y) return true;
    if (!val[x].empty() && !val[y].empty() && val[x] != val[y]) return false;
    if (val[x].empty()) std::swap(x, y);
    up[y] = x;
    return true;
  }
};

bool unify_eq(CellSolver& cs, size_t ne, size_t nb,
              const std::vector<std::string>& mid,
              const std::vector<std::string>& pre) {
  size_t len = ne + mid.size();
  if (len != pre.size() + nb) return false;
  for (size_t i = 0; i < len; ++i) {
    bool lcell = i < ne;
    bool rcell = i >= pre.size();
    if (lcell && rcell) {
      if (!cs.merge(static_cast<int>(i), static_cast<int>(ne + i - pre.size())))
        return false;
    } else if (lcell) {
      if (!cs.assign(static_cast<int>(i), pre[i])) return false;
    } else if (rcell) {
      if (!cs.assign(static_cast<int>(ne + i - pre.size()), mid[i - ne]))
        return false;
    } else {
      if (mid[i - ne] != pre[i]) return false;
    }
  }
  return true;
}

}  // namespace

std::optional<C3Witness> c3_witness(const Contexts& out_ctx,
                                    const Contexts& in_ctx) {
  // |es| - |bs| is fixed by both equations; they must agree.
  long off1 = static_cast<long>(out_ctx.ectx.size()) -
              static_cast<long>(in_ctx.nctx.size());
  long off2 = static_cast<long>(in_ctx.ectx.size()) -
              static_cast<long>(out_ctx.nctx.size());
  if (off1 != off2) return std::nullopt;
  size_t cap = out_ctx.ectx.size() + out_ctx.nctx.size() +
               in_ctx.ectx.size() + in_ctx.nctx.size() + 2;
  for (size_t ne = off1 > 0 ? static_cast<size_t>(off1) : 0; ne <= cap; ++ne) {
    long nbl = static_cast<long>(ne) - off1;
    if (nbl < 0) continue;
    size_t nb = static_cast<size_t>(nbl);
    CellSolver cs(ne + nb);
    if (!unify_eq(cs, ne, nb, in_ctx.nctx, out_ctx.ectx)) continue;
    if (!unify_eq(cs, ne, nb, out_ctx.nctx, in_ctx.ectx)) continue;
    C3Witness wit;
    for (size_t i = 0; i < ne + nb; ++i) {
      std::string v = cs.val[cs.find(static_cast<int>(i))];
      if (v.empty()) v = "X";  // unconstrained slot, any box name works
      (i < ne ? wit.es : wit.bs).push_back(v);
    }
    return wit;
  }
  return std::nullopt;
}

std::optional<C3Witness> c3_witness(const Tensor& t, const std::string& pair) {
  DirEdge o{Dir::Out, pair}, i{Dir::In, pair};
  if (!t.has_edge(o) || !t.has_edge(i))
    throw std::runtime_error("edge " + pair + " is not bound in the term");
  return c3_witness(t.contexts(o), t.contexts(i));
}

// -- renaming and product ----------------------------------------------------

EdgeTerm rename_all(const EdgeTerm& e, const NameMap& m) {
  EdgeTerm out;
  for (const auto& item : e.items) {
    if (const auto* d = std::get_if<DirEdge>(&item.v)) {
      out.items.push_back(edge(d->dir, m.map_edge(d->name)));
    } else {
      const auto& g = std::get<EdgeGroup>(item.v);
      out.items.push_back(
          group(g.clockwise, m.map_box(g.box), rename_all(g.body, m)));
    }
  }
  return out;
}

PreTensor rename_all(const PreTensor& p, const NameMap& m) {
  PreTensor out;
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      out.factors.push_back(atom(a->symbol, rename_all(a->edges, m)));
    } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
      out.factors.push_back(idwire(m.map_edge(w->out), m.map_edge(w->in)));
    } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
      out.factors.push_back(bangbox(m.map_box(b->box), rename_all(b->body, m)));
    } else {
      out.factors.push_back(f);
    }
  }
  return out;
}

Tensor rename_free(const Tensor& t, const NameMap& m, const Signature& sig) {
  std::set<std::string> free_names;
  for (const auto& d : t.free_edges()) free_names.insert(d.name);
  for (const auto& [from, to] : m.edges) {
    if (!free_names.count(from))
      throw std::runtime_error("rename: " + from + " is not a free edge name");
    (void)to;
  }
  for (const auto& [from, to] : m.boxes) {
    if (!t.boxes().count(from))
      throw std::runtime_error("rename: " + from + " is not a !-box name");
    (void)to;
  }
  auto r = validate(rename_all(t.term(), m), sig);
  if (!r.ok())
    throw std::runtime_error("rename: result invalid ([" +
                             to_string(r.violations.front().cond) + "] " +
                             r.violations.front().message + ")");
  return *std::move(r.tensor);
}

ValidationResult product(const Tensor& g, const Tensor& h,
                         const Signature& sig) {
  PreTensor p = g.term();
  for (const auto& f : h.term().factors) p.factors.push_back(f);
  return validate(p, sig);
}

namespace {
void collect(const EdgeTerm& e, std::set<std::string>& en,
             std::set<std::string>& bn) {
  for (const auto& item : e.items) {
    if (const auto* d = std::get_if<DirEdge>(&item.v)) {
      en.insert(d->name);
    } else {
      const auto& g = std::get<EdgeGroup>(item.v);
      bn.insert(g.box);
      collect(g.body, en, bn);
    }
  }
}
void collect(const PreTensor& p, std::set<std::string>& en,
             std::set<std::string>& bn) {
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      collect(a->edges, en, bn);
    } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
      en.insert(w->out);
      en.insert(w->in);
    } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
      bn.insert(b->box);
      collect(b->body, en, bn);
    }
  }
}
}  // namespace

std::set<std::string> edge_names(const PreTensor& p) {
  std::set<std::string> en, bn;
  collect(p, en, bn);
  return en;
}

std::set<std::string> box_names(const PreTensor& p) {
  std::set<std::string> en, bn;
  collect(p, en, bn);
  return bn;
}

}  // namespace bang
