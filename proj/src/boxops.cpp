#include "bang/boxops.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "bang/canon.hpp"
#include "bang/syntax.hpp"

namespace bang {

// -- freshness ---------------------------------------------------------------

std::string fresh_name(const std::string& base, std::set<std::string>& used) {
  // strip an existing numeric suffix so copies of copies stay readable
  std::string stem = base;
  auto dot = stem.rfind('.');
  if (dot != std::string::npos && dot + 1 < stem.size() &&
      stem.find_first_not_of("0123456789", dot + 1) == std::string::npos)
    stem = stem.substr(0, dot);
  for (int k = 1;; ++k) {
    std::string cand = stem + "." + std::to_string(k);
    if (used.insert(cand).second) return cand;
  }
}

namespace {

void scope_names_et(const EdgeTerm& e, const std::string& box, bool inside,
                    std::set<std::string>& es, std::set<std::string>& bs) {
  for (const auto& item : e.items) {
    if (const auto* d = std::get_if<DirEdge>(&item.v)) {
      if (inside) es.insert(d->name);
    } else {
      const auto& g = std::get<EdgeGroup>(item.v);
      bool in2 = inside || g.box == box;
      if (in2) bs.insert(g.box == box ? std::string() : g.box);
      scope_names_et(g.body, box, in2, es, bs);
    }
  }
}

void scope_names_pre(const PreTensor& p, const std::string& box, bool inside,
                     std::set<std::string>& es, std::set<std::string>& bs) {
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      scope_names_et(a->edges, box, inside, es, bs);
    } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
      if (inside) {
        es.insert(w->out);
        es.insert(w->in);
      }
    } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
      bool in2 = inside || b->box == box;
      if (in2 && b->box != box) bs.insert(b->box);
      scope_names_pre(b->body, box, in2, es, bs);
    }
  }
}

NameMap to_name_map(const FreshMap& fr) {
  return NameMap{fr.edges, fr.boxes};
}

std::set<std::string> all_names(const PreTensor& p) {
  auto r = edge_names(p);
  for (const auto& b : box_names(p)) r.insert(b);
  return r;
}

}  // namespace

void scope_names(const PreTensor& p, const std::string& box,
                 std::set<std::string>& edges_out,
                 std::set<std::string>& boxes_out) {
  scope_names_pre(p, box, false, edges_out, boxes_out);
  boxes_out.erase(std::string());
}

FreshMap complete_fresh(const FreshMap& fr, const PreTensor& term,
                        const std::string& box, bool with_box,
                        std::set<std::string> used) {
  std::set<std::string> se, sb;
  scope_names(term, box, se, sb);
  if (with_box) sb.insert(box);
  for (const auto& n : all_names(term)) used.insert(n);

  FreshMap out = fr;
  std::set<std::string> images;
  auto claim = [&](const std::string& from, const std::string& img) {
    if (!images.insert(img).second)
      throw std::runtime_error("freshness map is not injective at '" + img +
                               "'");
    if (used.count(img))
      throw std::runtime_error("stale freshness map: image '" + img +
                               "' for '" + from + "' is already in use");
  };
  for (const auto& [k, v] : out.edges) claim(k, v);
  for (const auto& [k, v] : out.boxes) claim(k, v);
  for (const auto& img : images) used.insert(img);

  for (const auto& n : se)
    if (!out.edges.count(n)) out.edges[n] = fresh_name(n, used);
  for (const auto& n : sb)
    if (!out.boxes.count(n)) out.boxes[n] = fresh_name(n, used);
  return out;
}

// -- the five operations -----------------------------------------------------

namespace {

void require_box(const Tensor& t, const std::string& box) {
  if (!t.boxes().count(box))
    throw std::runtime_error("unknown !-box '" + box + "'");
}

EdgeTerm kill_et(const EdgeTerm& e, const std::string& box) {
  EdgeTerm r;
  for (const auto& item : e.items) {
    if (std::get_if<DirEdge>(&item.v)) {
      r.items.push_back(item);
    } else {
      const auto& g = std::get<EdgeGroup>(item.v);
      if (g.box == box) continue;
      r.items.push_back(group(g.clockwise, g.box, kill_et(g.body, box)));
    }
  }
  return r;
}

PreTensor kill_pre(const PreTensor& p, const std::string& box) {
  PreTensor r;
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      r.factors.push_back(atom(a->symbol, kill_et(a->edges, box)));
    } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
      if (b->box == box) continue;
      r.factors.push_back(bangbox(b->box, kill_pre(b->body, box)));
    } else {
      r.factors.push_back(f);
    }
  }
  return r;
}

EdgeTerm drop_et(const EdgeTerm& e, const std::string& box) {
  EdgeTerm r;
  for (const auto& item : e.items) {
    if (std::get_if<DirEdge>(&item.v)) {
      r.items.push_back(item);
    } else {
      const auto& g = std::get<EdgeGroup>(item.v);
      EdgeTerm body = drop_et(g.body, box);
      if (g.box == box) {
        for (auto& it : body.items) r.items.push_back(std::move(it));
      } else {
        r.items.push_back(group(g.clockwise, g.box, std::move(body)));
      }
    }
  }
  return r;
}

PreTensor drop_pre(const PreTensor& p, const std::string& box) {
  PreTensor r;
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      r.factors.push_back(atom(a->symbol, drop_et(a->edges, box)));
    } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
      PreTensor body = drop_pre(b->body, box);
      if (b->box == box) {
        for (auto& g : body.factors) r.factors.push_back(std::move(g));
      } else {
        r.factors.push_back(bangbox(b->box, std::move(body)));
      }
    } else {
      r.factors.push_back(f);
    }
  }
  return r;
}

// boxed=false gives Exp (an unboxed copy after CW groups / before ACW),
// boxed=true gives Copy (a fresh boxed copy in the same positions)
EdgeTerm dup_et(const EdgeTerm& e, const std::string& box, const NameMap& fr,
                bool boxed) {
  EdgeTerm r;
  for (const auto& item : e.items) {
    if (std::get_if<DirEdge>(&item.v)) {
      r.items.push_back(item);
      continue;
    }
    const auto& g = std::get<EdgeGroup>(item.v);
    if (g.box != box) {
      r.items.push_back(group(g.clockwise, g.box, dup_et(g.body, box, fr, boxed)));
      continue;
    }
    EdgeTerm copy = rename_all(g.body, fr);
    auto emit_copy = [&] {
      if (boxed) {
        r.items.push_back(group(g.clockwise, fr.map_box(box), std::move(copy)));
      } else {
        for (auto& it : copy.items) r.items.push_back(std::move(it));
      }
    };
    if (g.clockwise) {
      r.items.push_back(item);
      emit_copy();
    } else {
      emit_copy();
      r.items.push_back(item);
    }
  }
  return r;
}

PreTensor dup_pre(const PreTensor& p, const std::string& box, const NameMap& fr,
                  bool boxed) {
  PreTensor r;
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      r.factors.push_back(atom(a->symbol, dup_et(a->edges, box, fr, boxed)));
    } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
      if (b->box != box) {
        r.factors.push_back(bangbox(b->box, dup_pre(b->body, box, fr, boxed)));
        continue;
      }
      r.factors.push_back(f);
      PreTensor copy = rename_all(b->body, fr);
      if (boxed) {
        r.factors.push_back(bangbox(fr.map_box(box), std::move(copy)));
      } else {
        for (auto& g : copy.factors) r.factors.push_back(std::move(g));
      }
    } else {
      r.factors.push_back(f);
    }
  }
  return r;
}

PreTensor weaken_pre(const PreTensor& p, const std::string& box,
                     const PreTensor& payload) {
  PreTensor r;
  for (const auto& f : p.factors) {
    if (const auto* b = std::get_if<BangBox>(&f.v)) {
      PreTensor body = weaken_pre(b->body, box, payload);
      if (b->box == box)
        for (const auto& g : payload.factors) body.factors.push_back(g);
      r.factors.push_back(bangbox(b->box, std::move(body)));
    } else {
      r.factors.push_back(f);
    }
  }
  return r;
}

}  // namespace

Tensor kill_box(const Tensor& t, const std::string& box, const Signature& sig) {
  require_box(t, box);
  return must_validate(kill_pre(t.term(), box), sig);
}

Tensor drop_box(const Tensor& t, const std::string& box, const Signature& sig) {
  require_box(t, box);
  return must_validate(drop_pre(t.term(), box), sig);
}

Tensor expand_box(const Tensor& t, const std::string& box, const FreshMap& fr,
                  const Signature& sig, FreshMap* completed) {
  require_box(t, box);
  FreshMap full = complete_fresh(fr, t.term(), box, false);
  if (completed) *completed = full;
  return must_validate(dup_pre(t.term(), box, to_name_map(full), false), sig);
}

Tensor copy_box(const Tensor& t, const std::string& box, const FreshMap& fr,
                const Signature& sig, FreshMap* completed) {
  require_box(t, box);
  FreshMap full = complete_fresh(fr, t.term(), box, true);
  if (completed) *completed = full;
  return must_validate(dup_pre(t.term(), box, to_name_map(full), true), sig);
}

Tensor weaken_box(const Tensor& t, const std::string& box,
                  const PreTensor& payload, const Signature& sig) {
  require_box(t, box);
  return must_validate(weaken_pre(t.term(), box, payload), sig);
}

// -- steps and sequences -----------------------------------------------------

std::string to_string(OpKind k) {
  switch (k) {
    case OpKind::Kill: return "kill";
    case OpKind::Drop: return "drop";
    case OpKind::Exp: return "exp";
    case OpKind::Copy: return "copy";
    case OpKind::Weak: return "weaken";
  }
  return "?";
}

std::string to_string(const OpStep& s) {
  std::string r = to_string(s.kind) + " " + s.box;
  if (s.kind == OpKind::Exp || s.kind == OpKind::Copy) {
    if (!s.fresh.empty()) {
      r += " (";
      bool first = true;
      for (const auto& [k, v] : s.fresh.edges) {
        if (!first) r += ", ";
        first = false;
        r += k + "->" + v;
      }
      for (const auto& [k, v] : s.fresh.boxes) {
        if (!first) r += ", ";
        first = false;
        r += k + "->" + v;
      }
      r += ")";
    }
  } else if (s.kind == OpKind::Weak) {
    r += " { " + print_tensor(s.payload) + " }";
  }
  return r;
}

std::string to_string(const OpSeq& s) {
  std::string r;
  for (const auto& st : s) {
    if (!r.empty()) r += "\n";
    r += to_string(st);
  }
  return r;
}

OpStep parse_op_step(const std::string& line) {
  std::istringstream in(line);
  std::string kind, box;
  in >> kind >> box;
  OpStep s;
  if (kind == "kill") s.kind = OpKind::Kill;
  else if (kind == "drop") s.kind = OpKind::Drop;
  else if (kind == "exp") s.kind = OpKind::Exp;
  else if (kind == "copy") s.kind = OpKind::Copy;
  else if (kind == "weaken") s.kind = OpKind::Weak;
  else throw std::runtime_error("unknown op '" + kind + "' in: " + line);
  if (box.empty()) throw std::runtime_error("missing box name in: " + line);
  s.box = box;
  std::string rest;
  std::getline(in, rest);
  size_t a = rest.find_first_not_of(" \t");
  if (a == std::string::npos) return s;
  rest = rest.substr(a);
  if (rest.front() == '(') {
    if (s.kind != OpKind::Exp && s.kind != OpKind::Copy)
      throw std::runtime_error("freshness list not allowed for " + kind);
    size_t close = rest.find(')');
    if (close == std::string::npos)
      throw std::runtime_error("unterminated freshness list in: " + line);
    std::string body = rest.substr(1, close - 1);
    std::istringstream pairs(body);
    std::string item;
    while (std::getline(pairs, item, ',')) {
      size_t arrow = item.find("->");
      if (arrow == std::string::npos)
        throw std::runtime_error("expected name->name in: " + line);
      auto trim = [](std::string x) {
        size_t b = x.find_first_not_of(" \t");
        size_t e = x.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
      };
      std::string from = trim(item.substr(0, arrow));
      std::string to = trim(item.substr(arrow + 2));
      if (from.empty() || to.empty())
        throw std::runtime_error("expected name->name in: " + line);
      // box renames are recognized at application time
      s.fresh.edges[from] = to;
    }
  } else if (rest.front() == '{') {
    if (s.kind != OpKind::Weak)
      throw std::runtime_error("payload only allowed for weaken");
    size_t close = rest.rfind('}');
    if (close == std::string::npos)
      throw std::runtime_error("unterminated payload in: " + line);
    s.payload = parse_tensor(rest.substr(1, close - 1));
  } else {
    throw std::runtime_error("trailing junk in op step: " + line);
  }
  return s;
}

OpSeq parse_op_seq(const std::string& text) {
  OpSeq r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t b = line.find_last_not_of(" \t\r");
    r.push_back(parse_op_step(line.substr(a, b - a + 1)));
  }
  return r;
}

namespace {

// pairs written `X->Y` in scripts do not distinguish edges from boxes;
// sort them out against the operand's actual scope
FreshMap classify_fresh(const FreshMap& fr, const Tensor& t,
                        const std::string& box, bool with_box) {
  std::set<std::string> se, sb;
  scope_names(t.term(), box, se, sb);
  if (with_box) sb.insert(box);
  FreshMap r;
  for (const auto& [k, v] : fr.edges) {
    if (sb.count(k)) r.boxes[k] = v;
    else r.edges[k] = v;
  }
  for (const auto& [k, v] : fr.boxes) r.boxes[k] = v;
  return r;
}

}  // namespace

Tensor apply_op(const Tensor& t, const OpStep& step, const Signature& sig,
                OpStep* completed) {
  if (completed) *completed = step;
  switch (step.kind) {
    case OpKind::Kill:
      return kill_box(t, step.box, sig);
    case OpKind::Drop:
      return drop_box(t, step.box, sig);
    case OpKind::Exp: {
      FreshMap fr = classify_fresh(step.fresh, t, step.box, false);
      FreshMap full;
      Tensor r = expand_box(t, step.box, fr, sig, &full);
      if (completed) completed->fresh = full;
      return r;
    }
    case OpKind::Copy: {
      FreshMap fr = classify_fresh(step.fresh, t, step.box, true);
      FreshMap full;
      Tensor r = copy_box(t, step.box, fr, sig, &full);
      if (completed) completed->fresh = full;
      return r;
    }
    case OpKind::Weak:
      return weaken_box(t, step.box, step.payload, sig);
  }
  throw std::logic_error("unreachable op kind");
}

Tensor apply_ops(const Tensor& t, const OpSeq& ops, const Signature& sig) {
  Tensor cur = t;
  for (size_t i = 0; i < ops.size(); ++i) {
    try {
      cur = apply_op(cur, ops[i], sig);
    } catch (const std::exception& ex) {
      throw std::runtime_error("step " + std::to_string(i + 1) + " (" +
                               to_string(ops[i]) + "): " + ex.what());
    }
  }
  return cur;
}

// -- instance enumeration ----------------------------------------------------

namespace {

std::vector<std::string> top_level_boxes(const Tensor& t) {
  std::vector<std::string> r;
  for (const auto& b : t.boxes())
    if (!t.box_parent().count(b)) r.push_back(b);
  return r;
}

void enum_go(const Tensor& cur, std::map<std::string, int> budget, int max_exp,
             const Signature& sig, OpSeq sofar,
             std::map<std::string, Instance>& out) {
  auto tops = top_level_boxes(cur);
  if (tops.empty()) {
    out.emplace(iso_key(cur), Instance{cur, std::move(sofar)});
    return;
  }
  const std::string& b = *std::min_element(tops.begin(), tops.end());
  int r = budget.count(b) ? budget[b] : max_exp;
  {
    OpSeq next = sofar;
    next.push_back(OpStep{OpKind::Kill, b, {}, {}});
    enum_go(kill_box(cur, b, sig), budget, max_exp, sig, std::move(next), out);
  }
  if (r > 0) {
    FreshMap full;
    Tensor t2 = expand_box(cur, b, {}, sig, &full);
    auto budget2 = budget;
    budget2[b] = r - 1;
    for (const auto& [orig, img] : full.boxes) budget2[img] = r - 1;
    OpSeq next = std::move(sofar);
    next.push_back(OpStep{OpKind::Exp, b, full, {}});
    enum_go(t2, std::move(budget2), max_exp, sig, std::move(next), out);
  }
}

}  // namespace

std::vector<Instance> enumerate_instances_ops(const Tensor& t, int max_exp,
                                              const Signature& sig) {
  if (max_exp < 0) throw std::runtime_error("negative expansion bound");
  std::map<std::string, Instance> out;
  enum_go(t, {}, max_exp, sig, {}, out);
  std::vector<Instance> r;
  r.reserve(out.size());
  for (auto& [k, v] : out) r.push_back(std::move(v));
  return r;
}

std::vector<Tensor> enumerate_instances(const Tensor& t, int max_exp,
                                        const Signature& sig) {
  std::vector<Tensor> r;
  for (auto& inst : enumerate_instances_ops(t, max_exp, sig))
    r.push_back(std::move(inst.tensor));
  return r;
}

// -- normal form of operation sequences --------------------------------------

namespace {

// (depth, path-from-root); level order puts every outer box before any
// deeper one, siblings alphabetically
using Rank = std::pair<int, std::vector<std::string>>;

struct RankTable {
  std::map<std::string, Rank> r;

  const Rank& of(const std::string& box) const {
    auto it = r.find(box);
    if (it == r.end())
      throw std::logic_error("no rank recorded for box '" + box + "'");
    return it->second;
  }

  void from_tensor(const Tensor& t) {
    for (const auto& b : t.boxes()) {
      std::vector<std::string> path{b};
      auto cur = b;
      while (t.box_parent().count(cur)) {
        cur = t.box_parent().at(cur);
        path.push_back(cur);
      }
      std::reverse(path.begin(), path.end());
      r[b] = {static_cast<int>(path.size()) - 1, std::move(path)};
    }
  }

  void inherit(const FreshMap& fr) {
    for (const auto& [orig, img] : fr.boxes)
      if (!this->r.count(img) && this->r.count(orig)) this->r[img] = of(orig);
  }

  void payload_boxes(const std::string& host, const PreTensor& payload) {
    Rank base = of(host);
    std::function<void(const PreTensor&, Rank)> walk = [&](const PreTensor& p,
                                                           Rank at) {
      for (const auto& f : p.factors)
        if (const auto* b = std::get_if<BangBox>(&f.v)) {
          Rank mine = at;
          mine.first += 1;
          mine.second.push_back(b->box);
          if (!this->r.count(b->box)) this->r[b->box] = mine;
          walk(b->body, mine);
        }
    };
    walk(payload, base);
  }
};

bool strictly_inside(const Tensor& t, const std::string& inner,
                     const std::string& outer) {
  auto cur = inner;
  while (t.box_parent().count(cur)) {
    cur = t.box_parent().at(cur);
    if (cur == outer) return true;
  }
  return false;
}

void collect_ends(const EdgeTerm& e, std::set<DirEdge>& out) {
  for (const auto& it : e.items) {
    if (const auto* d = std::get_if<DirEdge>(&it.v))
      out.insert(*d);
    else
      collect_ends(std::get<EdgeGroup>(it.v).body, out);
  }
}

void collect_ends(const PreTensor& p, std::set<DirEdge>& out) {
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      collect_ends(a->edges, out);
    } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
      out.insert({Dir::Out, w->out});
      out.insert({Dir::In, w->in});
    } else if (const auto* b = std::get_if<BangBox>(&f.v)) {
      collect_ends(b->body, out);
    }
  }
}

// A Weak step that moves before x may reuse names that only became free once
// x (say a Kill) had run; refresh any payload name whose earlier insertion
// would clash.  The normalization contract is agreement up to a free-name
// bijection, so the rename is harmless.
OpStep weak_moved_first(const OpStep& y, const Tensor& s, const OpStep& x) {
  if (y.kind != OpKind::Weak || y.payload.factors.empty()) return y;
  std::set<DirEdge> occupied;
  collect_ends(s.term(), occupied);
  collect_ends(x.payload, occupied);
  std::set<std::string> taken = all_names(s.term());
  for (const auto& n : all_names(x.payload)) taken.insert(n);

  std::set<DirEdge> mine;
  collect_ends(y.payload, mine);
  std::set<std::string> used = taken;
  for (const auto& n : all_names(y.payload)) used.insert(n);

  NameMap m;
  for (const auto& e : mine)
    if (occupied.count(e) && !m.edges.count(e.name))
      m.edges[e.name] = fresh_name(e.name, used);
  for (const auto& b : box_names(y.payload))
    if (taken.count(b)) m.boxes[b] = fresh_name(b, used);
  if (m.empty()) return y;
  OpStep out = y;
  out.payload = rename_all(y.payload, m);
  return out;
}

// Reordering invalidates pinned freshness entries: a domain name may not yet
// exist at the new position, or an image may already be taken.  Keep the
// entries that still apply and let complete_fresh default the rest — the
// normalization contract is only up to a free-name bijection.
OpStep sanitize_for(const Tensor& s, const OpStep& st) {
  if (st.kind != OpKind::Exp && st.kind != OpKind::Copy) return st;
  std::set<std::string> se, sb;
  scope_names(s.term(), st.box, se, sb);
  if (st.kind == OpKind::Copy) sb.insert(st.box);
  std::set<std::string> names = all_names(s.term());
  OpStep out = st;
  out.fresh = {};
  std::set<std::string> images;
  for (const auto& [k, v] : st.fresh.edges)
    if (se.count(k) && !names.count(v) && images.insert(v).second)
      out.fresh.edges.emplace(k, v);
  for (const auto& [k, v] : st.fresh.boxes)
    if (sb.count(k) && !names.count(v) && images.insert(v).second)
      out.fresh.boxes.emplace(k, v);
  return out;
}

// Rewrites the adjacent pair [x, y] (x applied first at state s) into an
// equivalent list with y first, using the nested-box commutation theorems.
OpSeq swap_pair(const Tensor& s, const OpStep& x, const OpStep& y,
                const Signature& sig, RankTable& ranks) {
  if (!s.boxes().count(y.box)) throw std::logic_error("mover box not in state");
  if (!strictly_inside(s, x.box, y.box)) {
    if (strictly_inside(s, y.box, x.box))
      throw std::logic_error("normalization moved an inner op past its box");
    return {weak_moved_first(y, s, x), x};  // disjoint boxes commute as-is
  }
  // x acts inside y's box
  switch (y.kind) {
    case OpKind::Kill:
      return {y};
    case OpKind::Drop:
    case OpKind::Weak:
      return {weak_moved_first(y, s, x), x};
    case OpKind::Exp:
    case OpKind::Copy: {
      OpStep yc;
      apply_op(s, sanitize_for(s, y), sig, &yc);
      const std::string& x_box2 = yc.fresh.boxes.at(x.box);
      OpStep x2;
      x2.kind = x.kind;
      x2.box = x_box2;
      if (x.kind == OpKind::Weak) {
        // the fresh copy is weakened by the payload carried over the copy's
        // renaming; payload-internal names are refreshed to avoid clashes
        NameMap nm{yc.fresh.edges, yc.fresh.boxes};
        PreTensor pl = rename_all(x.payload, nm);
        std::set<std::string> mapped;
        for (const auto& [k, v] : yc.fresh.edges) mapped.insert(v);
        for (const auto& [k, v] : yc.fresh.boxes) mapped.insert(v);
        std::set<std::string> used = all_names(s.term());
        for (const auto& n : all_names(x.payload)) used.insert(n);
        for (const auto& n : all_names(pl)) used.insert(n);
        for (const auto& n : mapped) used.insert(n);
        NameMap refresh;
        for (const auto& n : edge_names(pl))
          if (!mapped.count(n)) refresh.edges[n] = fresh_name(n, used);
        for (const auto& n : box_names(pl))
          if (!mapped.count(n)) refresh.boxes[n] = fresh_name(n, used);
        x2.payload = rename_all(pl, refresh);
      }
      ranks.inherit(yc.fresh);
      if (x2.kind == OpKind::Weak)
        ranks.payload_boxes(x_box2, x2.payload);
      return {yc, x, x2};
    }
  }
  throw std::logic_error("unreachable op kind");
}

}  // namespace

OpSeq normalize_ops(const Tensor& t, const OpSeq& ops, const Signature& sig) {
  RankTable ranks;
  ranks.from_tensor(t);

  // pin down every freshness choice first so reordering is deterministic
  OpSeq seq;
  Tensor cur = t;
  for (const auto& step : ops) {
    OpStep c;
    cur = apply_op(cur, step, sig, &c);
    if (c.kind == OpKind::Exp || c.kind == OpKind::Copy) ranks.inherit(c.fresh);
    if (c.kind == OpKind::Weak) ranks.payload_boxes(c.box, c.payload);
    seq.push_back(std::move(c));
  }

  OpSeq result;
  Tensor state = t;
  while (!seq.empty()) {
    size_t j = 0;
    for (size_t i = 1; i < seq.size(); ++i)
      if (ranks.of(seq[i].box) < ranks.of(seq[j].box)) j = i;
    while (j > 0) {
      Tensor s = state;
      for (size_t k = 0; k + 1 < j; ++k)
        s = apply_op(s, sanitize_for(s, seq[k]), sig);
      OpSeq repl = swap_pair(s, seq[j - 1], seq[j], sig, ranks);
      seq.erase(seq.begin() + static_cast<long>(j - 1),
                seq.begin() + static_cast<long>(j + 1));
      seq.insert(seq.begin() + static_cast<long>(j - 1), repl.begin(),
                 repl.end());
      --j;
    }
    OpStep done;
    state = apply_op(state, sanitize_for(state, seq.front()), sig, &done);
    ranks.inherit(done.fresh);
    result.push_back(std::move(done));
    seq.erase(seq.begin());
  }
  return result;
}

}  // namespace bang
