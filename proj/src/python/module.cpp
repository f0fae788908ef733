#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bang/boxops.hpp"
#include "bang/calculus.hpp"
#include "bang/canon.hpp"
#include "bang/model.hpp"
#include "bang/syntax.hpp"

namespace py = pybind11;
using namespace bang;

namespace {

Tensor parse_valid(const std::string& term) {
  return must_validate(parse_tensor(term));
}

std::string edge_str(const DirEdge& e) {
  return (e.dir == Dir::Out ? "+" : "-") + e.name;
}

std::vector<DirEdge> order_from(const std::vector<std::string>& toks) {
  std::vector<DirEdge> r;
  for (const auto& t : toks) {
    if (t.size() < 2 || (t[0] != '+' && t[0] != '-'))
      throw std::runtime_error("order entries look like +name or -name");
    r.push_back({t[0] == '+' ? Dir::Out : Dir::In, t.substr(1)});
  }
  return r;
}

OpSeq ops_from(std::string text) {
  std::replace(text.begin(), text.end(), ';', '\n');
  return parse_op_seq(text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "non-commutative !-tensor calculus";

  m.def(
      "validate",
      [](const std::string& term) {
        auto vr = validate(parse_tensor(term));
        py::dict d;
        d["valid"] = vr.ok();
        py::list viol;
        for (const auto& v : vr.violations) {
          py::dict x;
          x["condition"] = to_string(v.cond);
          x["subject"] = v.subject;
          x["message"] = v.message;
          viol.append(x);
        }
        d["violations"] = viol;
        if (vr.ok()) {
          py::list fe;
          for (const auto& e : vr.tensor->free_edges()) fe.append(edge_str(e));
          d["free_edges"] = fe;
          py::list bx;
          for (const auto& b : vr.tensor->boxes()) bx.append(b);
          d["boxes"] = bx;
        }
        return d;
      },
      py::arg("term"), "Well-formedness check; returns a verdict dict.");

  m.def(
      "canon",
      [](const std::string& term) { return canonical_print(parse_valid(term)); },
      py::arg("term"), "Canonical representative of the ≡-class.");

  m.def(
      "equiv",
      [](const std::string& a, const std::string& b) {
        return equiv(parse_valid(a), parse_valid(b));
      },
      py::arg("lhs"), py::arg("rhs"));

  m.def(
      "iso_map",
      [](const std::string& a, const std::string& b) -> py::object {
        auto r = equiv_upto_renaming(parse_valid(a), parse_valid(b));
        if (!r) return py::none();
        py::dict d;
        d["edges"] = r->edges;
        d["boxes"] = r->boxes;
        return d;
      },
      py::arg("lhs"), py::arg("rhs"),
      "Free-name/box bijection making the sides equivalent, or None.");

  m.def(
      "apply_ops",
      [](const std::string& term, const std::string& ops) {
        return print_tensor(apply_ops(parse_valid(term), ops_from(ops)));
      },
      py::arg("term"), py::arg("ops"),
      "Applies a ';'-separated !-box operation sequence.");

  m.def(
      "normalize_ops",
      [](const std::string& term, const std::string& ops) {
        return to_string(normalize_ops(parse_valid(term), ops_from(ops)));
      },
      py::arg("term"), py::arg("ops"));

  m.def(
      "instances",
      [](const std::string& term, int max_exp) {
        std::vector<std::string> out;
        for (const auto& t : enumerate_instances(parse_valid(term), max_exp))
          out.push_back(print_tensor(t));
        return out;
      },
      py::arg("term"), py::arg("max_exp") = 2);

  m.def(
      "prove",
      [](const std::string& theory_text, const std::string& proof_text) {
        auto tf = parse_theory(theory_text);
        auto rep = run_proof_scripts(tf, parse_proof_file(proof_text));
        py::list out;
        for (const auto& l : rep.lemmas) {
          py::dict d;
          d["lemma"] = l.lemma;
          d["verdict"] = to_string(l.verdict);
          d["message"] = l.message;
          d["line"] = l.line;
          out.append(d);
        }
        return out;
      },
      py::arg("theory"), py::arg("proofs"),
      "Runs .btp proof scripts against a .bt theory (both as text).");

  m.def(
      "evaluate",
      [](const std::string& term, const std::string& model_json,
         const std::vector<std::string>& order) {
        Tensor t = parse_valid(term);
        Model mo = load_model(model_json);
        std::vector<DirEdge> ord =
            order.empty() ? t.free_edges() : order_from(order);
        auto r = evaluate(t, mo, ord);
        py::dict d;
        py::list o;
        for (const auto& e : r.order) o.append(edge_str(e));
        d["order"] = o;
        d["array"] = r.array;
        return d;
      },
      py::arg("term"), py::arg("model"),
      py::arg("order") = std::vector<std::string>{});

  m.def(
      "check_rule",
      [](const std::string& theory_text, const std::string& rule,
         const std::string& model_json, int max_exp) {
        auto tf = parse_theory(theory_text);
        std::vector<std::pair<std::string, Equation>> lemmas;
        Theory th = make_theory(tf, &lemmas);
        const Equation* e = th.find(rule);
        if (!e)
          for (const auto& [n, eq] : lemmas)
            if (n == rule) e = &eq;
        if (!e) throw std::runtime_error("unknown rule '" + rule + "'");
        auto v = check_rule_in_model(*e, load_model(model_json), max_exp, th.sig);
        py::dict d;
        d["ok"] = v.ok;
        d["message"] = v.message;
        d["instances_checked"] = v.instances_checked;
        return d;
      },
      py::arg("theory"), py::arg("rule"), py::arg("model"),
      py::arg("max_exp") = 2);

  m.def(
      "to_json",
      [](const std::string& term) { return export_json(parse_valid(term)); },
      py::arg("term"));
  m.def(
      "from_json",
      [](const std::string& text) { return print_tensor(import_json(text)); },
      py::arg("text"));
  m.def(
      "to_dot",
      [](const std::string& term) { return export_dot(parse_valid(term)); },
      py::arg("term"));
}
