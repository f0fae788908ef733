// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "bang/calculus.hpp"
#include "bang/canon.hpp"
#include "bang/model.hpp"
#include "bang/syntax.hpp"
#include "support/gen.hpp"

using namespace bang;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Tensor T(const std::string& s, const Signature& sig = {}) {
  return must_validate(parse_tensor(s), sig);
}

struct Check {
  std::string name;
  double limit_s;
  std::function<void()> run;  // throws on failure
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

// ---------------------------------------------------------------------------

void c1_classification() {
  expect(validate(parse_tensor("psi([+a>A) [phi(-a)]A")).ok(), "allowed #1");
  expect(validate(parse_tensor("psi([+a>A) phi(<-a]A) []A")).ok(),
         "allowed #2");
  auto c3 = validate(parse_tensor("psi(+a) [phi(-a)]A"));
  expect(!c3.ok() && c3.violations[0].cond == Cond::C3, "C3 composite");
  auto c2 = validate(parse_tensor("phi([[-a>A>B) [[psi(-b)]B xi(<+b]B)]A"));
  bool has_c2 = false;
  for (const auto& v : c2.violations) has_c2 |= v.cond == Cond::C2;
  expect(!c2.ok() && has_c2, "C2 composite");
}

void c2_worked_example() {
  Tensor t = T("[phi(+a -c +b) psi(+c -d)]B xi([-a>B) zeta(<-b +d]B -e)");
  expect(equiv(kill_box(t, "B"), T("xi() zeta(-e)")), "kill");
  FreshMap fr;
  for (const char* n : {"a", "b", "c", "d"})
    fr.edges.emplace(n, std::string(n) + "1");
  expect(equiv(expand_box(t, "B", fr),
               T("[phi(+a -c +b) psi(+c -d)]B phi(+a1 -c1 +b1) psi(+c1 -d1) "
                 "xi([-a>B -a1) zeta(-b1 +d1 <-b +d]B -e)")),
         "exp");
}

void c3_preservation() {
  gen::Rng rng(gen::seed_from_env(103));
  int done = 0;
  while (done < 1000) {
    Tensor t = gen::random_term(rng);
    auto st = gen::random_op(rng, t);
    if (!st) continue;
    ++done;
    Tensor r = apply_op(t, *st);  // validates internally
    expect(validate(r.term()).ok(), "revalidation after " + to_string(*st));
  }
}

// -- context-lemma rows ------------------------------------------------------

std::vector<std::string> map_all(const std::vector<std::string>& xs,
                                 const FreshMap& fr) {
  std::vector<std::string> out;
  for (const auto& x : xs) {
    auto it = fr.boxes.find(x);
    out.push_back(it == fr.boxes.end() ? x : it->second);
  }
  return out;
}

std::vector<std::string> drop_at(const std::vector<std::string>& xs, size_t i) {
  auto out = xs;
  out.erase(out.begin() + i);
  return out;
}

// expected contexts of the fresh copy of `a` after Exp/Copy at position i of
// the edge (in_ectx) or node context
Contexts fresh_expected(const Contexts& c, size_t i, bool in_ectx, bool copy,
                        const FreshMap& fr) {
  Contexts out;
  if (in_ectx) {
    for (size_t j = 0; j < c.ectx.size(); ++j) {
      if (j < i || (copy && j == i))
        out.ectx.push_back(fr.boxes.at(c.ectx[j]));
      else if (j > i)
        out.ectx.push_back(c.ectx[j]);
    }
    out.nctx = c.nctx;
  } else {
    out.ectx = map_all(c.ectx, fr);
    for (size_t j = 0; j < c.nctx.size(); ++j) {
      if (j < i || (copy && j == i))
        out.nctx.push_back(fr.boxes.at(c.nctx[j]));
      else if (j > i)
        out.nctx.push_back(c.nctx[j]);
    }
  }
  return out;
}

void c4_context_table() {
  gen::Rng rng(gen::seed_from_env(104));
  // rows: drop-e, drop-n, exp-e, exp-n, copy-e, copy-n
  int hits[6] = {0, 0, 0, 0, 0, 0};
  auto all_done = [&] {
    for (int h : hits)
      if (h < 100) return false;
    return true;
  };
  int guard = 0;
  while (!all_done() && ++guard < 20000) {
    Tensor t = gen::random_term(rng);
    for (const auto& a : t.free_edges()) {
      Contexts c = t.contexts(a);
      for (size_t i = 0; i < c.ectx.size() + c.nctx.size(); ++i) {
        bool in_e = i < c.ectx.size();
        size_t pos = in_e ? i : i - c.ectx.size();
        std::string box = in_e ? c.ectx[pos] : c.nctx[pos];

        Tensor dropped = drop_box(t, box);
        Contexts dc = dropped.contexts(a);
        Contexts dexp = c;
        if (in_e)
          dexp.ectx = drop_at(c.ectx, pos);
        else
          dexp.nctx = drop_at(c.nctx, pos);
        expect(dc == dexp, "drop row");
        ++hits[in_e ? 0 : 1];

        for (bool copy : {false, true}) {
          OpStep st{copy ? OpKind::Copy : OpKind::Exp, box, {}, {}};
          OpStep done;
          Tensor r = apply_op(t, st, {}, &done);
          expect(r.contexts(a) == c, "original untouched");
          DirEdge fa{a.dir, done.fresh.edges.at(a.name)};
          expect(r.contexts(fa) ==
                     fresh_expected(c, pos, in_e, copy, done.fresh),
                 std::string(copy ? "copy" : "exp") + " row");
          ++hits[(copy ? 4 : 2) + (in_e ? 0 : 1)];
        }
      }
    }
  }
  expect(all_done(), "not all rows reached 100 hits");
}

// -- algebraic identities ----------------------------------------------------

OpStep induced_on(const OpStep& st, const std::string& box) {
  OpStep out;
  out.kind = st.kind;
  out.box = box;
  if (st.kind == OpKind::Weak) {
    // fresh payload names: comparison is up to free-name bijection
    NameMap m;
    int k = 0;
    for (const auto& e : edge_names(st.payload))
      m.edges.emplace(e, e + ".z" + std::to_string(++k));
    out.payload = rename_all(st.payload, m);
  }
  return out;
}

void c5_identities() {
  gen::Rng rng(gen::seed_from_env(105));

  int exp_drop_copy = 0;
  while (exp_drop_copy < 200) {
    Tensor t = gen::random_term(rng);
    if (t.boxes().empty()) continue;
    ++exp_drop_copy;
    std::vector<std::string> bs(t.boxes().begin(), t.boxes().end());
    std::string b = bs[gen::pick(rng, 0, int(bs.size()) - 1)];
    FreshMap edges_only;
    Tensor ex = expand_box(t, b, {}, {}, &edges_only);
    FreshMap full;
    Tensor cp = copy_box(t, b, edges_only, {}, &full);
    expect(equiv(ex, drop_box(cp, full.boxes.at(b))), "exp = drop.copy");
  }

  int commute = 0;
  while (commute < 200) {
    Tensor t = gen::random_term(rng);
    std::vector<std::pair<std::string, std::string>> pairs;
    auto inside = [&](std::string x, const std::string& y) {
      while (t.box_parent().count(x)) {
        x = t.box_parent().at(x);
        if (x == y) return true;
      }
      return false;
    };
    for (const auto& x : t.boxes())
      for (const auto& y : t.boxes())
        if (x < y && !inside(x, y) && !inside(y, x)) pairs.emplace_back(x, y);
    if (pairs.empty()) continue;
    ++commute;
    auto [x, y] = pairs[gen::pick(rng, 0, int(pairs.size()) - 1)];
    OpStep sx = *gen::random_op(rng, t);
    sx.box = x;
    OpStep sy = *gen::random_op(rng, t);
    sy.box = y;
    if (sx.kind == OpKind::Weak && sy.kind == OpKind::Weak)
      sy.payload = {};  // avoid a payload-name clash between the two steps
    Tensor xy = apply_op(apply_op(t, sx), sy);
    Tensor yx = apply_op(apply_op(t, sy), sx);
    expect(equiv_upto_renaming(xy, yx).has_value(), "non-nested commute");
  }

  int nested = 0;
  while (nested < 200) {
    Tensor t = gen::random_term(rng);
    std::vector<std::pair<std::string, std::string>> pairs;  // (inner, outer)
    for (const auto& [child, parent] : t.box_parent())
      pairs.emplace_back(child, parent);
    if (pairs.empty()) continue;
    ++nested;
    auto [b, a] = pairs[gen::pick(rng, 0, int(pairs.size()) - 1)];
    OpStep op_b = *gen::random_op(rng, t);
    op_b.box = b;
    op_b.fresh = {};

    // Kill_A . Op_B = Kill_A
    expect(equiv(kill_box(apply_op(t, op_b), a), kill_box(t, a)),
           "kill absorbs");
    // Drop_A . Op_B = Op_B . Drop_A
    expect(equiv_upto_renaming(drop_box(apply_op(t, op_b), a),
                               apply_op(drop_box(t, a), op_b))
               .has_value(),
           "drop slides");
    // Exp_A . Op_B = Op_B' . Op_B . Exp_A,  B' = fr_A(B)
    {
      Tensor lhs = expand_box(apply_op(t, op_b), a);
      FreshMap fra;
      Tensor rhs = expand_box(t, a, {}, {}, &fra);
      rhs = apply_op(rhs, op_b);
      rhs = apply_op(rhs, induced_on(op_b, fra.boxes.at(b)));
      expect(equiv_upto_renaming(lhs, rhs).has_value(), "exp distributes");
    }
    // Copy_A . Op_B = Op_B' . Op_B . Copy_A
    {
      Tensor lhs = copy_box(apply_op(t, op_b), a);
      FreshMap fra;
      Tensor rhs = copy_box(t, a, {}, {}, &fra);
      rhs = apply_op(rhs, op_b);
      rhs = apply_op(rhs, induced_on(op_b, fra.boxes.at(b)));
      expect(equiv_upto_renaming(lhs, rhs).has_value(), "copy distributes");
    }
  }

  int norm = 0;
  while (norm < 200) {
    Tensor t = gen::random_term(rng);
    if (t.boxes().empty()) continue;
    ++norm;
    OpSeq ops;
    Tensor cur = t;
    for (int k = 0; k < 3 && !cur.boxes().empty(); ++k) {
      auto st = gen::random_op(rng, cur);
      if (!st) break;
      OpStep done;
      cur = apply_op(cur, *st, {}, &done);
      ops.push_back(done);
    }
    if (ops.empty()) continue;
    expect(equiv_upto_renaming(apply_ops(t, normalize_ops(t, ops)), cur)
               .has_value(),
           "normalize_ops agreement");
  }
}

void c6_spider() {
  Tensor spider = T("s([-i>A [+o>B) []A []B");
  for (int n = 0; n <= 3; ++n) {
    auto fast = enumerate_instances(spider, n);
    expect(int(fast.size()) == (n + 1) * (n + 1),
           "count at N=" + std::to_string(n));
    std::set<std::string> keys;
    for (const auto& f : fast) keys.insert(iso_key(f));
    expect(keys == gen::brute_instances(spider, n),
           "oracle mismatch at N=" + std::to_string(n));
  }
}

void c7_proofs() {
  TheoryFile tf = parse_theory(slurp("corpus/monoid.bt"));
  auto rep =
      run_proof_scripts(tf, parse_proof_file(slurp("corpus/monoid_merge.btp")));
  expect(rep.all_proved(),
         rep.lemmas.empty() ? "no lemmas" : rep.lemmas[0].message);

  const char* adversarial =
      "prove merge {\nby induction B {\nbase {\nlhs\n-> Tbase\n-> Tstep\n"
      "-> unitR\nqed\n}\nstep {\nlhs\n-> ih ops { exp B }\nqed\n}\n}\n}\n";
  auto bad = run_proof_scripts(tf, parse_proof_file(adversarial));
  expect(bad.lemmas.size() == 1 &&
             bad.lemmas[0].verdict == Verdict::FixedBoxViolation,
         "adversarial script not rejected with the fixed-box verdict");
}

void c8_model() {
  Model m = load_model(slurp("corpus/z2_group_algebra.json"));
  TheoryFile tf = parse_theory(slurp("corpus/monoid.bt"));
  std::vector<std::pair<std::string, Equation>> lemmas;
  Theory th = make_theory(tf, &lemmas);

  std::vector<std::pair<std::string, Equation>> all = th.axioms;
  all.insert(all.end(), lemmas.begin(), lemmas.end());
  for (const auto& [name, e] : all) {
    auto v = check_rule_in_model(e, m, 2, th.sig);
    expect(v.ok, name + ": " + v.message);
    // the two evaluators agree on every instance of both sides
    for (const Tensor& side : {e.lhs, e.rhs})
      for (const auto& inst : enumerate_instances(side, 2, th.sig)) {
        auto order = inst.free_edges();
        expect(evaluate(inst, m, order) == naive_contract(inst, m, order),
               name + ": evaluator mismatch");
      }
  }
}

void c9_roundtrip() {
  gen::Rng rng(gen::seed_from_env(109));
  for (int i = 0; i < 10000; ++i) {
    PreTensor p = gen::random_term(rng).term();
    expect(parse_tensor(print_tensor(p)) == p, "parse.print");
  }
  std::vector<std::string> corpus = {
      "[phi(+a -c +b) psi(+c -d)]B xi([-a>B) zeta(<-b +d]B -e)",
      "psi([+a>A) [phi(-a)]A",
      "psi([+a>A) phi(<-a]A) []A",
      "s([-i>A [+o>B) []A []B",
      "1",
  };
  TheoryFile tf = parse_theory(slurp("corpus/monoid.bt"));
  for (const auto& r : tf.rules) {
    corpus.push_back(r.lhs_src);
    corpus.push_back(r.rhs_src);
  }
  for (int i = 0; i < 100; ++i)
    corpus.push_back(canonical_print(gen::random_term(rng)));
  for (const auto& s : corpus)
    expect(print_tensor(parse_tensor(s)) == s, "print.parse on: " + s);
}

}  // namespace

int main() {
  std::vector<Check> checks = {
      {"1 well-formedness classification", 1.0, c1_classification},
      {"2 kill/exp worked example", 1.0, c2_worked_example},
      {"3 operation preservation x1000", 30.0, c3_preservation},
      {"4 context table, 6 rows x100", 30.0, c4_context_table},
      {"5 algebraic identities x200", 60.0, c5_identities},
      {"6 spider instance counts", 10.0, c6_spider},
      {"7 proof corpus + fixed-box rejection", 5.0, c7_proofs},
      {"8 model soundness", 60.0, c8_model},
      {"9 syntax round-trip x10000", 30.0, c9_roundtrip},
  };
  int failures = 0;
  for (const auto& c : checks) {
    auto t0 = std::chrono::steady_clock::now();
    std::string err;
    try {
      c.run();
    } catch (const std::exception& e) {
      err = e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    bool ok = err.empty() && secs <= c.limit_s;
    if (!ok) ++failures;
    std::printf("[%s] %s (%.2fs, limit %.0fs)%s%s\n", ok ? "PASS" : "FAIL",
                c.name.c_str(), secs, c.limit_s, err.empty() ? "" : " -- ",
                err.c_str());
  }
  return failures == 0 ? 0 : 1;
}
