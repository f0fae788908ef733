#include "bang/canon.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "bang/syntax.hpp"

namespace bang {

// -- identity-wire contraction -----------------------------------------------

namespace {

bool occurs_dir(const EdgeTerm& e, Dir d, const std::string& n) {
  for (const auto& item : e.items) {
    if (const auto* de = std::get_if<DirEdge>(&item.v)) {
      if (de->dir == d && de->name == n) return true;
    } else if (occurs_dir(std::get<EdgeGroup>(item.v).body, d, n)) {
      return true;
    }
  }
  return false;
}

bool occurs_dir(const PreTensor& p, Dir d, const std::string& n) {
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      if (occurs_dir(a->edges, d, n)) return true;
    } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
      if ((d == Dir::Out && w->out == n) || (d == Dir::In && w->in == n))
        return true;
    } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
      if (occurs_dir(b->body, d, n)) return true;
    }
  }
  return false;
}

void rename_dir(EdgeTerm& e, Dir d, const std::string& from,
                const std::string& to) {
  for (auto& item : e.items) {
    if (auto* de = std::get_if<DirEdge>(&item.v)) {
      if (de->dir == d && de->name == from) de->name = to;
    } else {
      rename_dir(std::get<EdgeGroup>(item.v).body, d, from, to);
    }
  }
}

void rename_dir(PreTensor& p, Dir d, const std::string& from,
                const std::string& to) {
  for (auto& f : p.factors) {
    if (auto* a = std::get_if<Atom>(&f.v)) {
      rename_dir(a->edges, d, from, to);
    } else if (auto* w = std::get_if<IdWire>(&f.v)) {
      if (d == Dir::Out && w->out == from) w->out = to;
      if (d == Dir::In && w->in == from) w->in = to;
    } else if (auto* b = std::get_if<BangBox>(&f.v)) {
      rename_dir(b->body, d, from, to);
    }
  }
}

// Contracts wires whose bound partner lives in the same product subtree.
// A wire bound across a !-box wall is kept; the identity laws only apply
// within one product.
PreTensor contract_level(PreTensor p) {
  for (auto& f : p.factors)
    if (auto* b = std::get_if<BangBox>(&f.v))
      b->body = contract_level(std::move(b->body));

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < p.factors.size(); ++i) {
      const auto* w = std::get_if<IdWire>(&p.factors[i].v);
      if (!w) continue;
      std::string x = w->out, y = w->in;
      PreTensor rest = p;
      rest.factors.erase(rest.factors.begin() + static_cast<long>(i));
      if (occurs_dir(rest, Dir::In, x)) {
        rename_dir(rest, Dir::In, x, y);
        p = std::move(rest);
        changed = true;
        break;
      }
      if (occurs_dir(rest, Dir::Out, y)) {
        rename_dir(rest, Dir::Out, y, x);
        p = std::move(rest);
        changed = true;
        break;
      }
      if (x == y) {
        p.factors[i] = Factor{Circle{}};
        changed = true;
        break;
      }
    }
  }
  return p;
}

}  // namespace

PreTensor contract_wires(const PreTensor& p) {
  return contract_level(normalize_pretensor(p));
}

// -- canonical print search --------------------------------------------------

namespace {

struct Frame {
  const std::vector<Factor>* factors;
  std::vector<bool> used;
  std::string closer;
};

struct SearchState {
  std::string cur;
  std::vector<Frame> stack;
  std::map<std::string, std::string> emap;
  std::map<std::string, std::string> bmap;
  int next_bound = 1;
  int next_free = 1;
  int next_box = 1;
};

struct SearchResult {
  std::string text;
  std::map<std::string, std::string> emap;
  std::map<std::string, std::string> bmap;
};

class CanonSearch {
 public:
  CanonSearch(bool iso, std::set<std::string> bound, std::set<std::string> avoid)
      : iso_(iso), bound_(std::move(bound)), avoid_(std::move(avoid)) {}

  SearchResult run(const PreTensor& p) {
    SearchState st;
    st.stack.push_back(Frame{&p.factors,
                             std::vector<bool>(p.factors.size(), false), ""});
    dfs(std::move(st));
    if (!have_best_) throw std::logic_error("canonical search found nothing");
    return {best_, best_emap_, best_bmap_};
  }

 private:
  bool iso_;
  std::set<std::string> bound_;
  std::set<std::string> avoid_;
  bool have_best_ = false;
  std::string best_;
  std::map<std::string, std::string> best_emap_, best_bmap_;

  bool prunable(const std::string& cur) const {
    if (!have_best_) return false;
    size_t n = std::min(cur.size(), best_.size());
    for (size_t i = 0; i < n; ++i) {
      if (cur[i] < best_[i]) return false;
      if (cur[i] > best_[i]) return true;
    }
    return cur.size() > best_.size();
  }

  std::string map_edge(SearchState& st, const std::string& n) {
    bool is_bound = bound_.count(n) != 0;
    if (!is_bound && !iso_) return n;
    auto it = st.emap.find(n);
    if (it != st.emap.end()) return it->second;
    std::string fresh;
    if (is_bound) {
      do {
        fresh = "b" + std::to_string(st.next_bound++);
      } while (avoid_.count(fresh));
    } else {
      fresh = "f" + std::to_string(st.next_free++);
    }
    st.emap[n] = fresh;
    return fresh;
  }

  std::string map_box(SearchState& st, const std::string& n) {
    if (!iso_) return n;
    auto it = st.bmap.find(n);
    if (it != st.bmap.end()) return it->second;
    std::string fresh = "B" + std::to_string(st.next_box++);
    st.bmap[n] = fresh;
    return fresh;
  }

  void emit_edgeterm(SearchState& st, const EdgeTerm& e) {
    bool first = true;
    for (const auto& item : e.items) {
      if (!first) st.cur += ' ';
      first = false;
      if (const auto* d = std::get_if<DirEdge>(&item.v)) {
        st.cur += d->dir == Dir::Out ? '+' : '-';
        st.cur += map_edge(st, d->name);
      } else {
        const auto& g = std::get<EdgeGroup>(item.v);
        st.cur += g.clockwise ? '[' : '<';
        emit_edgeterm(st, g.body);
        st.cur += g.clockwise ? '>' : ']';
        st.cur += map_box(st, g.box);
      }
    }
  }

  // Returns true when a box frame was pushed (body still pending).
  bool emit_factor(SearchState& st, const Factor& f) {
    if (!st.cur.empty() && st.cur.back() != '[') st.cur += ' ';
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      st.cur += a->symbol;
      st.cur += '(';
      emit_edgeterm(st, a->edges);
      st.cur += ')';
    } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
      st.cur += "id(+" + map_edge(st, w->out) + " -" + map_edge(st, w->in) + ")";
    } else if (std::get_if<Circle>(&f.v)) {
      st.cur += "circle";
    } else {
      const auto& b = std::get<BangBox>(f.v);
      std::string closer = "]" + map_box(st, b.box);
      st.cur += '[';
      st.stack.push_back(Frame{&b.body.factors,
                               std::vector<bool>(b.body.factors.size(), false),
                               std::move(closer)});
      return true;
    }
    return false;
  }

  void dfs(SearchState st) {
    if (prunable(st.cur)) return;
    if (st.stack.empty()) {
      if (!have_best_ || st.cur < best_) {
        have_best_ = true;
        best_ = st.cur;
        best_emap_ = st.emap;
        best_bmap_ = st.bmap;
      }
      return;
    }
    Frame& top = st.stack.back();
    size_t remaining =
        static_cast<size_t>(std::count(top.used.begin(), top.used.end(), false));
    if (remaining == 0) {
      SearchState next = std::move(st);
      next.cur += next.stack.back().closer;
      next.stack.pop_back();
      dfs(std::move(next));
      return;
    }
    std::set<std::string> tried;
    for (size_t i = 0; i < top.factors->size(); ++i) {
      if (top.used[i]) continue;
      SearchState next = st;
      next.stack.back().used[i] = true;
      size_t prev = next.cur.size();
      bool pushed = emit_factor(next, (*top.factors)[i]);
      if (!pushed) {
        // identical chunks lead to identical subtrees; search one of them
        std::string chunk = next.cur.substr(prev);
        if (!tried.insert(chunk).second) continue;
      }
      dfs(std::move(next));
    }
  }
};

SearchResult canonical_search(const Tensor& t, bool iso) {
  PreTensor p = contract_wires(t.term());
  std::set<std::string> bound;
  {
    // recompute from the contracted term; contraction can unbind names
    std::map<std::string, int> outs, ins;
    std::function<void(const EdgeTerm&)> we = [&](const EdgeTerm& e) {
      for (const auto& item : e.items) {
        if (const auto* d = std::get_if<DirEdge>(&item.v))
          (d->dir == Dir::Out ? outs : ins)[d->name]++;
        else
          we(std::get<EdgeGroup>(item.v).body);
      }
    };
    std::function<void(const PreTensor&)> wp = [&](const PreTensor& q) {
      for (const auto& f : q.factors) {
        if (const auto* a = std::get_if<Atom>(&f.v)) we(a->edges);
        else if (const auto* w = std::get_if<IdWire>(&f.v)) {
          outs[w->out]++;
          ins[w->in]++;
        } else if (const auto* b = std::get_if<BangBox>(&f.v))
          wp(b->body);
      }
    };
    wp(p);
    for (const auto& [n, c] : outs)
      if (c > 0 && ins.count(n)) bound.insert(n);
  }
  // iso mode renames every name systematically, so pool clashes with the
  // original names cannot arise there
  std::set<std::string> avoid;
  if (!iso) {
    avoid = box_names(p);
    for (const auto& n : edge_names(p))
      if (!bound.count(n)) avoid.insert(n);
  }
  CanonSearch cs(iso, std::move(bound), std::move(avoid));
  return cs.run(p);
}

}  // namespace

std::string canonical_print(const Tensor& t) {
  auto r = canonical_search(t, false);
  return r.text.empty() ? "1" : r.text;
}

Tensor canonical_form(const Tensor& t, const Signature& sig) {
  return must_validate(parse_tensor(canonical_print(t)), sig);
}

bool equiv(const Tensor& g, const Tensor& h) {
  return canonical_print(g) == canonical_print(h);
}

std::string iso_key(const Tensor& t) {
  auto r = canonical_search(t, true);
  return r.text.empty() ? "1" : r.text;
}

std::optional<NameMap> equiv_upto_renaming(const Tensor& g, const Tensor& h) {
  auto rg = canonical_search(g, true);
  auto rh = canonical_search(h, true);
  if (rg.text != rh.text) return std::nullopt;
  std::map<std::string, std::string> canon_to_h_edge, canon_to_h_box;
  std::set<std::string> h_free;
  for (const auto& d : h.free_edges()) h_free.insert(d.name);
  for (const auto& [orig, canon] : rh.emap)
    if (h_free.count(orig)) canon_to_h_edge[canon] = orig;
  for (const auto& [orig, canon] : rh.bmap) canon_to_h_box[canon] = orig;
  NameMap m;
  std::set<std::string> g_free;
  for (const auto& d : g.free_edges()) g_free.insert(d.name);
  for (const auto& [orig, canon] : rg.emap) {
    if (!g_free.count(orig)) continue;
    auto it = canon_to_h_edge.find(canon);
    if (it == canon_to_h_edge.end()) return std::nullopt;
    m.edges[orig] = it->second;
  }
  for (const auto& [orig, canon] : rg.bmap) {
    auto it = canon_to_h_box.find(canon);
    if (it == canon_to_h_box.end()) return std::nullopt;
    m.boxes[orig] = it->second;
  }
  return m;
}

}  // namespace bang
