#include "bang/calculus.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "bang/canon.hpp"

namespace bang {

// -- equations ---------------------------------------------------------------

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string r;
  for (const auto& s : v) {
    if (!r.empty()) r += ",";
    r += s;
  }
  return r;
}

std::set<std::string> term_names(const PreTensor& p) {
  auto r = edge_names(p);
  for (const auto& b : box_names(p)) r.insert(b);
  return r;
}

}  // namespace

std::vector<std::string> boundary_violations(const Tensor& lhs,
                                             const Tensor& rhs) {
  std::vector<std::string> out;
  {
    std::set<DirEdge> l(lhs.free_edges().begin(), lhs.free_edges().end());
    std::set<DirEdge> r(rhs.free_edges().begin(), rhs.free_edges().end());
    for (const auto& e : l)
      if (!r.count(e))
        out.push_back("free edge " + std::string(e.dir == Dir::Out ? "+" : "-") +
                      e.name + " only on the left");
    for (const auto& e : r)
      if (!l.count(e))
        out.push_back("free edge " + std::string(e.dir == Dir::Out ? "+" : "-") +
                      e.name + " only on the right");
  }
  for (const auto& b : lhs.boxes())
    if (!rhs.boxes().count(b)) out.push_back("box " + b + " only on the left");
  for (const auto& b : rhs.boxes())
    if (!lhs.boxes().count(b)) out.push_back("box " + b + " only on the right");
  if (out.empty() && lhs.box_parent() != rhs.box_parent())
    out.push_back("box nesting differs between the sides");
  if (out.empty()) {
    for (const auto& e : lhs.free_edges()) {
      const auto& cl = lhs.contexts(e);
      const auto& cr = rhs.contexts(e);
      if (!(cl == cr))
        out.push_back("contexts of " + std::string(e.dir == Dir::Out ? "+" : "-") +
                      e.name + " differ: (" + join(cl.ectx) + ";" +
                      join(cl.nctx) + ") vs (" + join(cr.ectx) + ";" +
                      join(cr.nctx) + ")");
    }
  }
  return out;
}

Equation check_equation(const Tensor& lhs, const Tensor& rhs) {
  auto v = boundary_violations(lhs, rhs);
  if (!v.empty()) {
    std::string msg = "incompatible boundaries:";
    for (const auto& s : v) msg += " [" + s + "]";
    throw std::runtime_error(msg);
  }
  return Equation{lhs, rhs};
}

const Equation* Theory::find(const std::string& name) const {
  for (const auto& [n, e] : axioms)
    if (n == name) return &e;
  return nullptr;
}

void Theory::add(const std::string& name, Equation e) {
  axioms.emplace_back(name, std::move(e));
}

Theory make_theory(const TheoryFile& tf,
                   std::vector<std::pair<std::string, Equation>>* lemmas) {
  Theory th;
  th.sig = tf.signature;
  for (const auto& r : tf.rules) {
    Equation e = [&] {
      try {
        return check_equation(must_validate(parse_tensor(r.lhs_src), th.sig),
                              must_validate(parse_tensor(r.rhs_src), th.sig));
      } catch (const std::exception& ex) {
        throw std::runtime_error((r.is_lemma ? "lemma " : "rule ") + r.name +
                                 ": " + ex.what());
      }
    }();
    if (r.is_lemma) {
      if (lemmas) lemmas->emplace_back(r.name, std::move(e));
    } else {
      th.add(r.name, std::move(e));
    }
  }
  return th;
}

// -- congruence rules --------------------------------------------------------

Equation eq_op(const Equation& e, const OpStep& step, const Signature& sig,
               OpStep* completed) {
  if (completed) *completed = step;
  switch (step.kind) {
    case OpKind::Kill:
      return check_equation(kill_box(e.lhs, step.box, sig),
                            kill_box(e.rhs, step.box, sig));
    case OpKind::Drop:
      return check_equation(drop_box(e.lhs, step.box, sig),
                            drop_box(e.rhs, step.box, sig));
    case OpKind::Weak:
      return check_equation(weaken_box(e.lhs, step.box, step.payload, sig),
                            weaken_box(e.rhs, step.box, step.payload, sig));
    case OpKind::Exp:
    case OpKind::Copy: {
      bool with_box = step.kind == OpKind::Copy;
      FreshMap fr;
      for (const auto& [k, v] : step.fresh.edges) {
        if (e.lhs.boxes().count(k)) fr.boxes[k] = v;
        else fr.edges[k] = v;
      }
      for (const auto& [k, v] : step.fresh.boxes) fr.boxes[k] = v;
      std::set<std::string> used = term_names(e.lhs.term());
      for (const auto& n : term_names(e.rhs.term())) used.insert(n);
      // one shared freshness function covering both sides
      FreshMap full = complete_fresh(fr, e.lhs.term(), step.box, with_box, used);
      full = complete_fresh(full, e.rhs.term(), step.box, with_box, used);
      if (completed) completed->fresh = full;
      if (step.kind == OpKind::Exp)
        return check_equation(expand_box(e.lhs, step.box, full, sig),
                              expand_box(e.rhs, step.box, full, sig));
      return check_equation(copy_box(e.lhs, step.box, full, sig),
                            copy_box(e.rhs, step.box, full, sig));
    }
  }
  throw std::logic_error("unreachable op kind");
}

namespace {

Tensor must_product(const Tensor& a, const Tensor& b, const Signature& sig) {
  auto r = product(a, b, sig);
  if (!r.ok()) {
    std::string msg = "product is not well-defined:";
    for (const auto& v : r.violations)
      msg += " [" + to_string(v.cond) + " " + v.subject + "]";
    throw std::runtime_error(msg);
  }
  return *r.tensor;
}

}  // namespace

Equation derive_prod(const Equation& e, const Tensor& k, const Signature& sig) {
  return check_equation(must_product(e.lhs, k, sig), must_product(e.rhs, k, sig));
}

Equation derive_prod2(const Equation& e, const Tensor& k, const Signature& sig) {
  return check_equation(must_product(k, e.lhs, sig), must_product(k, e.rhs, sig));
}

Equation derive_box(const Equation& e, const std::string& box,
                    const Signature& sig) {
  auto boxed = [&](const Tensor& t) {
    return must_validate(PreTensor{{bangbox(box, t.term())}}, sig);
  };
  return check_equation(boxed(e.lhs), boxed(e.rhs));
}

Equation derive_rename(const Equation& e, const NameMap& m,
                       const Signature& sig) {
  return check_equation(rename_free(e.lhs, m, sig), rename_free(e.rhs, m, sig));
}

Equation derive_weaken(const Equation& e, const std::string& box,
                       const PreTensor& payload, const Signature& sig) {
  return check_equation(weaken_box(e.lhs, box, payload, sig),
                        weaken_box(e.rhs, box, payload, sig));
}

Equation derive_weaken2(const Equation& e, const std::string& box,
                        const Equation& payload, const Signature& sig) {
  return check_equation(weaken_box(e.lhs, box, payload.lhs.term(), sig),
                        weaken_box(e.rhs, box, payload.rhs.term(), sig));
}

// -- matching ----------------------------------------------------------------

namespace {

struct Level {
  std::vector<std::string> path;
  const PreTensor* body;
};

void collect_levels(const PreTensor& p, std::vector<std::string> path,
                    std::vector<Level>& out) {
  out.push_back({path, &p});
  for (const auto& f : p.factors)
    if (const auto* b = std::get_if<BangBox>(&f.v)) {
      auto sub = path;
      sub.push_back(b->box);
      collect_levels(b->body, std::move(sub), out);
    }
}

void combinations(size_t n, size_t k,
                  const std::function<bool(const std::vector<size_t>&)>& cb) {
  std::vector<size_t> idx(k);
  std::function<bool(size_t, size_t)> go = [&](size_t pos, size_t start) {
    if (pos == k) return cb(idx);
    for (size_t i = start; i + (k - pos) <= n; ++i) {
      idx[pos] = i;
      if (!go(pos + 1, i + 1)) return false;
    }
    return true;
  };
  go(0, 0);
}

// reclassifies script-supplied renames: keys naming a rule box are box renames
NameMap classify_rename(const NameMap& m, const Tensor& ref) {
  NameMap r;
  for (const auto& [k, v] : m.edges) {
    if (ref.boxes().count(k)) r.boxes[k] = v;
    else r.edges[k] = v;
  }
  for (const auto& [k, v] : m.boxes) r.boxes[k] = v;
  return r;
}

Equation prepare_rule(
    const Theory& th, const std::string& rule, const OpSeq& prep,
    const NameMap& rename,
    const std::vector<std::pair<std::string, PreTensor>>& weakenings) {
  const Equation* base = th.find(rule);
  if (!base) throw std::runtime_error("unknown rule '" + rule + "'");
  Equation cur = *base;
  for (const auto& step : prep) cur = eq_op(cur, step, th.sig);
  NameMap rn = classify_rename(rename, cur.lhs);
  if (!rn.empty()) cur = derive_rename(cur, rn, th.sig);
  for (const auto& [box, payload] : weakenings)
    cur = derive_weaken(cur, box, payload, th.sig);
  return cur;
}

}  // namespace

std::vector<MatchCert> find_matches(
    const Tensor& t, const Theory& th, const std::string& rule, bool reverse,
    const OpSeq& prep, const NameMap& rename,
    const std::vector<std::pair<std::string, PreTensor>>& weakenings,
    const MatchLimits& limits) {
  Equation prepared = prepare_rule(th, rule, prep, rename, weakenings);
  const Tensor& from = reverse ? prepared.rhs : prepared.lhs;
  size_t k = from.term().factors.size();

  std::vector<MatchCert> out;
  std::vector<Level> levels;
  collect_levels(t.term(), {}, levels);
  for (const auto& level : levels) {
    size_t n = level.body->factors.size();
    if (k > n) continue;
    combinations(n, k, [&](const std::vector<size_t>& idx) {
      PreTensor s;
      for (size_t i : idx) s.factors.push_back(level.body->factors[i]);
      auto vr = validate(s, th.sig);
      if (!vr.ok()) return true;
      auto m = equiv_upto_renaming(from, *vr.tensor);
      if (!m) return true;
      MatchCert c;
      c.rule = rule;
      c.reverse = reverse;
      c.prep = prep;
      c.rename = rename;
      c.weakenings = weakenings;
      c.at = {level.path, idx};
      c.binding = *m;
      out.push_back(std::move(c));
      return out.size() < limits.max_matches;
    });
    if (out.size() >= limits.max_matches) break;
  }
  return out;
}

namespace {

Tensor freshen_bound(const Tensor& x, std::set<std::string>& used,
                     const Signature& sig) {
  NameMap m;
  for (const auto& n : x.bound_names())
    if (used.count(n)) m.edges[n] = fresh_name(n, used);
  if (m.empty()) return x;
  return must_validate(rename_all(x.term(), m), sig);
}

}  // namespace

Tensor rewrite(const Tensor& t, const Theory& th, const MatchCert& cert) {
  Equation prepared =
      prepare_rule(th, cert.rule, cert.prep, cert.rename, cert.weakenings);
  Tensor from = cert.reverse ? prepared.rhs : prepared.lhs;
  Tensor to = cert.reverse ? prepared.lhs : prepared.rhs;

  PreTensor root = t.term();
  PreTensor* body = &root;
  for (const auto& boxname : cert.at.path) {
    PreTensor* next = nullptr;
    for (auto& f : body->factors)
      if (auto* b = std::get_if<BangBox>(&f.v))
        if (b->box == boxname) next = &b->body;
    if (!next)
      throw std::runtime_error("certificate path names missing box '" +
                               boxname + "'");
    body = next;
  }
  PreTensor s;
  for (size_t i : cert.at.indices) {
    if (i >= body->factors.size())
      throw std::runtime_error("certificate index out of range");
    s.factors.push_back(body->factors[i]);
  }
  Tensor s_t = must_validate(s, th.sig);

  std::set<std::string> used = term_names(t.term());
  for (const auto& [k, v] : cert.binding.edges) used.insert(v);
  for (const auto& [k, v] : cert.binding.boxes) used.insert(v);
  {
    auto u2 = used;
    for (const auto& n : term_names(from.term())) u2.insert(n);
    from = freshen_bound(from, u2, th.sig);
  }
  Tensor from_bound = rename_free(from, cert.binding, th.sig);
  if (!equiv(from_bound, s_t))
    throw std::runtime_error("certificate does not replay: occurrence is " +
                             canonical_print(s_t) + ", prepared side is " +
                             canonical_print(from_bound));
  {
    auto u2 = used;
    for (const auto& n : term_names(to.term())) u2.insert(n);
    to = freshen_bound(to, u2, th.sig);
  }
  Tensor to_bound = rename_free(to, cert.binding, th.sig);
  // bound names of the replacement must stay clear of the rest of t
  std::set<std::string> used2 = used;
  for (const auto& n : term_names(to_bound.term())) used2.insert(n);
  NameMap fin;
  for (const auto& n : to_bound.bound_names())
    if (used.count(n)) fin.edges[n] = fresh_name(n, used2);
  PreTensor repl = rename_all(to_bound.term(), fin);

  size_t insert_at =
      cert.at.indices.empty()
          ? body->factors.size()
          : *std::min_element(cert.at.indices.begin(), cert.at.indices.end());
  auto sorted = cert.at.indices;
  std::sort(sorted.rbegin(), sorted.rend());
  for (size_t i : sorted)
    body->factors.erase(body->factors.begin() + static_cast<long>(i));
  body->factors.insert(body->factors.begin() + static_cast<long>(insert_at),
                       repl.factors.begin(), repl.factors.end());
  return must_validate(root, th.sig);
}

// -- proof scripts -----------------------------------------------------------

namespace {

struct LineCursor {
  std::vector<std::pair<int, std::string>> lines;  // line number, content
  size_t pos = 0;

  explicit LineCursor(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      size_t a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos) continue;
      size_t b = line.find_last_not_of(" \t\r");
      lines.emplace_back(no, line.substr(a, b - a + 1));
    }
  }

  bool done() const { return pos >= lines.size(); }
  int line() const { return done() ? 0 : lines[pos].first; }
  const std::string& peek() const { return lines[pos].second; }
  std::string next() { return lines[pos++].second; }

  [[noreturn]] void fail(const std::string& msg) const {
    SourceSpan sp;
    sp.line = line();
    throw ParseError(msg, sp);
  }
};

// scans one `-> rule [rev] [at N] [ops {...}] [rename {...}] [weaken A {...}]`
StepRef parse_step_line(const std::string& s, int line) {
  StepRef st;
  st.line = line;
  size_t i = 2;  // past "->"
  auto skip_ws = [&] { while (i < s.size() && isspace(s[i])) ++i; };
  auto word = [&] {
    skip_ws();
    size_t b = i;
    while (i < s.size() && !isspace(s[i]) && s[i] != '{') ++i;
    return s.substr(b, i - b);
  };
  auto braced = [&] {
    skip_ws();
    if (i >= s.size() || s[i] != '{')
      throw ParseError("expected '{' in proof step", SourceSpan{0, 0, line, 1});
    int depth = 0;
    size_t b = ++i;
    for (; i < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}') {
        if (depth == 0) return s.substr(b, i++ - b);
        --depth;
      }
    }
    throw ParseError("unterminated '{' in proof step", SourceSpan{0, 0, line, 1});
  };
  st.rule = word();
  if (st.rule.empty())
    throw ParseError("missing rule name after '->'", SourceSpan{0, 0, line, 1});
  while (true) {
    skip_ws();
    if (i >= s.size()) break;
    std::string opt = word();
    if (opt == "rev") {
      st.reverse = true;
    } else if (opt == "at") {
      std::string n = word();
      if (n.empty() || n.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("expected a match index after 'at'",
                         SourceSpan{0, 0, line, 1});
      st.at = std::stoul(n);
    } else if (opt == "ops") {
      std::string body = braced();
      std::replace(body.begin(), body.end(), ';', '\n');
      st.ops = parse_op_seq(body);
    } else if (opt == "rename") {
      std::string body = braced();
      std::istringstream pairs(body);
      std::string item;
      while (std::getline(pairs, item, ',')) {
        size_t arrow = item.find("->");
        if (arrow == std::string::npos)
          throw ParseError("expected name->name in rename",
                           SourceSpan{0, 0, line, 1});
        auto trim = [](std::string x) {
          size_t b = x.find_first_not_of(" \t");
          size_t e = x.find_last_not_of(" \t");
          return b == std::string::npos ? std::string()
                                        : x.substr(b, e - b + 1);
        };
        st.rename.edges[trim(item.substr(0, arrow))] =
            trim(item.substr(arrow + 2));
      }
    } else if (opt == "weaken") {
      std::string box = word();
      st.weakenings.emplace_back(box, parse_tensor(braced()));
    } else {
      throw ParseError("unknown proof step option '" + opt + "'",
                       SourceSpan{0, 0, line, 1});
    }
  }
  return st;
}

ProofBody parse_body(LineCursor& cur) {
  ProofBody body;
  body.line = cur.line();
  while (!cur.done()) {
    if (cur.peek() == "}") {
      cur.next();
      return body;
    }
    int line = cur.line();
    std::string s = cur.next();
    if (s == "lhs") continue;  // explicit starting point, implied anyway
    if (s == "qed") continue;  // final check happens on block close
    if (s.rfind("->", 0) == 0) {
      body.steps.push_back(parse_step_line(s, line));
      continue;
    }
    SourceSpan sp;
    sp.line = line;
    throw ParseError("unexpected proof line: " + s, sp);
  }
  SourceSpan sp;
  throw ParseError("unterminated proof block", sp);
}

}  // namespace

std::vector<ProofScript> parse_proof_file(const std::string& text) {
  LineCursor cur(text);
  std::vector<ProofScript> out;
  while (!cur.done()) {
    std::string s = cur.peek();
    std::istringstream head(s);
    std::string kw, name, brace;
    head >> kw >> name >> brace;
    if (kw != "prove" || name.empty() || brace != "{")
      cur.fail("expected `prove <lemma> {`");
    ProofScript sc;
    sc.lemma = name;
    sc.line = cur.line();
    cur.next();
    if (!cur.done() && cur.peek().rfind("by induction", 0) == 0) {
      std::istringstream ind(cur.next());
      std::string by, induction, box, br;
      ind >> by >> induction >> box >> br;
      if (box.empty() || br != "{") cur.fail("expected `by induction <Box> {`");
      sc.induction = true;
      sc.box = box;
      bool saw_base = false, saw_step = false;
      while (!cur.done() && cur.peek() != "}") {
        std::istringstream blk(cur.peek());
        std::string which, b2;
        blk >> which >> b2;
        if (b2 != "{" || (which != "base" && which != "step"))
          cur.fail("expected `base {` or `step {`");
        cur.next();
        if (which == "base") {
          sc.base = parse_body(cur);
          saw_base = true;
        } else {
          sc.step = parse_body(cur);
          saw_step = true;
        }
      }
      if (cur.done()) cur.fail("unterminated induction block");
      cur.next();  // }
      if (!saw_base || !saw_step) cur.fail("induction needs base and step");
      if (cur.done() || cur.peek() != "}") cur.fail("expected `}` after induction");
      cur.next();
    } else {
      sc.body = parse_body(cur);
    }
    out.push_back(std::move(sc));
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Proved: return "proved";
    case Verdict::Failed: return "failed";
    case Verdict::BaseFailed: return "base failed";
    case Verdict::StepFailed: return "step failed";
    case Verdict::FixedBoxViolation: return "fixed-box violation";
  }
  return "?";
}

bool ProofReport::all_proved() const {
  for (const auto& l : lemmas)
    if (l.verdict != Verdict::Proved) return false;
  return true;
}

BodyResult run_proof_body(const Theory& th, const Equation& goal,
                          const ProofBody& body,
                          const std::optional<std::string>& fixed_box,
                          const Equation* ih) {
  Theory th2 = th;
  if (ih) th2.add("ih", *ih);
  Tensor cur = canonical_form(goal.lhs, th.sig);
  for (const auto& st : body.steps) {
    if (fixed_box && st.rule == "ih") {
      for (const auto& op : st.ops)
        if (op.box == *fixed_box && op.kind != OpKind::Weak)
          return {false, true,
                  "ih prepared with " + to_string(op.kind) +
                      " on the fixed box " + *fixed_box,
                  st.line};
    }
    try {
      auto ms = find_matches(cur, th2, st.rule, st.reverse, st.ops, st.rename,
                             st.weakenings);
      size_t idx = st.at.value_or(0);
      if (idx >= ms.size())
        return {false, false,
                "no match " + std::to_string(idx) + " for rule " + st.rule +
                    (st.reverse ? " rev" : "") + " in " + canonical_print(cur),
                st.line};
      cur = canonical_form(rewrite(cur, th2, ms[idx]), th.sig);
    } catch (const std::exception& ex) {
      return {false, false, ex.what(), st.line};
    }
  }
  if (!equiv(cur, goal.rhs))
    return {false, false,
            "stuck at " + canonical_print(cur) + ", goal rhs is " +
                canonical_print(goal.rhs),
            body.line};
  return {true, false, "", 0};
}

LemmaReport check_induction(const Theory& th, const std::string& lemma,
                            const Equation& goal, const std::string& box,
                            const ProofBody& base, const ProofBody& step) {
  if (!goal.lhs.boxes().count(box))
    return {lemma, Verdict::Failed, "box " + box + " does not occur in the goal",
            0};
  std::optional<Equation> base_goal, step_goal;
  try {
    base_goal = eq_op(goal, OpStep{OpKind::Kill, box, {}, {}}, th.sig);
    step_goal = eq_op(goal, OpStep{OpKind::Exp, box, {}, {}}, th.sig);
  } catch (const std::exception& ex) {
    return {lemma, Verdict::Failed, ex.what(), 0};
  }
  auto rb = run_proof_body(th, *base_goal, base);
  if (!rb.ok) return {lemma, Verdict::BaseFailed, rb.message, rb.line};
  auto rs = run_proof_body(th, *step_goal, step, box, &goal);
  if (!rs.ok)
    return {lemma,
            rs.fixed_box_violation ? Verdict::FixedBoxViolation
                                   : Verdict::StepFailed,
            rs.message, rs.line};
  return {lemma, Verdict::Proved, "", 0};
}

ProofReport run_proof_scripts(const TheoryFile& tf,
                              const std::vector<ProofScript>& scripts) {
  std::vector<std::pair<std::string, Equation>> lemmas;
  Theory th = make_theory(tf, &lemmas);
  ProofReport rep;
  for (const auto& sc : scripts) {
    const Equation* goal = nullptr;
    for (const auto& [n, e] : lemmas)
      if (n == sc.lemma) goal = &e;
    if (!goal) {
      rep.lemmas.push_back({sc.lemma, Verdict::Failed,
                            "no such lemma in the theory", sc.line});
      continue;
    }
    LemmaReport lr;
    if (sc.induction) {
      lr = check_induction(th, sc.lemma, *goal, sc.box, sc.base, sc.step);
    } else {
      auto r = run_proof_body(th, *goal, sc.body);
      lr = {sc.lemma, r.ok ? Verdict::Proved : Verdict::Failed, r.message,
            r.line};
    }
    if (lr.line == 0) lr.line = sc.line;
    rep.lemmas.push_back(lr);
    if (lr.verdict == Verdict::Proved) th.add(sc.lemma, *goal);
  }
  return rep;
}

}  // namespace bang
