#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bang/boxops.hpp"
#include "bang/calculus.hpp"
#include "bang/canon.hpp"
#include "bang/model.hpp"
#include "bang/syntax.hpp"

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kSemantic = 1;  // invalid / unproved / counterexample
constexpr int kUsage = 2;     // parse or usage errors

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<bang::DirEdge> parse_order(const std::string& s) {
  std::vector<bang::DirEdge> r;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    if (tok.size() < 2 || (tok[0] != '+' && tok[0] != '-'))
      throw std::runtime_error("order entries look like +name or -name");
    r.push_back({tok[0] == '+' ? bang::Dir::Out : bang::Dir::In, tok.substr(1)});
  }
  return r;
}

std::string edge_str(const bang::DirEdge& e) {
  return (e.dir == bang::Dir::Out ? "+" : "-") + e.name;
}

int cmd_check(const std::string& term, bool as_json) {
  auto vr = bang::validate(bang::parse_tensor(term));
  if (as_json) {
    json out;
    out["valid"] = vr.ok();
    out["violations"] = json::array();
    for (const auto& v : vr.violations)
      out["violations"].push_back({{"condition", bang::to_string(v.cond)},
                                   {"subject", v.subject},
                                   {"message", v.message}});
    if (vr.ok()) {
      out["free_edges"] = json::array();
      for (const auto& e : vr.tensor->free_edges())
        out["free_edges"].push_back(edge_str(e));
    }
    std::cout << out.dump(2) << "\n";
    return vr.ok() ? kOk : kSemantic;
  }
  if (vr.ok()) {
    std::cout << "valid";
    if (!vr.tensor->free_edges().empty()) {
      std::cout << "; free:";
      for (const auto& e : vr.tensor->free_edges()) std::cout << " " << edge_str(e);
    }
    std::cout << "\n";
    return kOk;
  }
  for (const auto& v : vr.violations)
    std::cout << "[" << bang::to_string(v.cond) << "] " << v.message << "\n";
  return kSemantic;
}

int cmd_prove(const std::string& theory_path, const std::string& proof_path,
              const std::string& model_path, int max_exp, bool as_json) {
  auto tf = bang::parse_theory(slurp(theory_path));
  auto scripts = bang::parse_proof_file(slurp(proof_path));
  auto rep = bang::run_proof_scripts(tf, scripts);

  bool model_ok = true;
  std::vector<std::pair<std::string, std::string>> model_lines;
  if (!model_path.empty()) {
    bang::Model m = bang::load_model(slurp(model_path));
    std::vector<std::pair<std::string, bang::Equation>> lemmas;
    bang::Theory th = bang::make_theory(tf, &lemmas);
    auto check = [&](const std::string& name, const bang::Equation& e) {
      auto v = bang::check_rule_in_model(e, m, max_exp, th.sig);
      model_lines.emplace_back(name, v.ok ? "pass (" +
                                                std::to_string(v.instances_checked) +
                                                " instances)"
                                          : v.message);
      if (!v.ok) model_ok = false;
    };
    for (const auto& [name, e] : th.axioms) check(name, e);
    for (const auto& lr : rep.lemmas)
      if (lr.verdict == bang::Verdict::Proved)
        for (const auto& [name, e] : lemmas)
          if (name == lr.lemma) check(name, e);
  }

  if (as_json) {
    json out;
    out["lemmas"] = json::array();
    for (const auto& l : rep.lemmas)
      out["lemmas"].push_back({{"lemma", l.lemma},
                               {"verdict", bang::to_string(l.verdict)},
                               {"message", l.message},
                               {"line", l.line}});
    if (!model_path.empty()) {
      out["model"] = json::array();
      for (const auto& [n, s] : model_lines)
        out["model"].push_back({{"rule", n}, {"result", s}});
    }
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& l : rep.lemmas) {
      std::cout << l.lemma << ": " << bang::to_string(l.verdict);
      if (!l.message.empty())
        std::cout << " -- " << l.message << " (line " << l.line << ")";
      std::cout << "\n";
    }
    for (const auto& [n, s] : model_lines)
      std::cout << "model " << n << ": " << s << "\n";
  }
  return rep.all_proved() && model_ok ? kOk : kSemantic;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"!-tensor calculus toolkit"};
  app.require_subcommand(1);
  bool as_json = false;
  int jobs = 1;
  app.add_flag("--json", as_json, "machine-readable output");
  app.add_option("--jobs", jobs, "worker threads (results are deterministic)");

  std::string term, term2, ops_text, model_path, order_text, format = "json",
                                                             out_path;
  std::string theory_path, proof_path;
  int max_exp = 2;
  bool normalize = false;

  auto* c_check = app.add_subcommand("check", "validate a !-tensor expression");
  c_check->add_option("term", term)->required();

  auto* c_canon = app.add_subcommand("canon", "print the canonical form");
  c_canon->add_option("term", term)->required();

  auto* c_eq = app.add_subcommand("eq", "decide equivalence of two terms");
  c_eq->add_option("lhs", term)->required();
  c_eq->add_option("rhs", term2)->required();

  auto* c_inst = app.add_subcommand("instances", "enumerate concrete instances");
  c_inst->add_option("term", term)->required();
  c_inst->add_option("--max", max_exp, "expansions per box");

  auto* c_op = app.add_subcommand("op", "apply !-box operations");
  c_op->add_option("term", term)->required();
  c_op->add_option("--ops", ops_text, "e.g. 'exp B (a->a1); kill A'")->required();
  c_op->add_flag("--normalize", normalize, "print the normal-form sequence");

  auto* c_prove = app.add_subcommand("prove", "check proof scripts");
  c_prove->add_option("theory", theory_path, ".bt file")->required();
  c_prove->add_option("proofs", proof_path, ".btp file")->required();
  c_prove->add_option("--require-model", model_path,
                      "also check every rule and proved lemma in this model");
  c_prove->add_option("--max", max_exp, "expansions per box for model checks");

  auto* c_eval = app.add_subcommand("eval", "evaluate in a model");
  c_eval->add_option("term", term)->required();
  c_eval->add_option("--model", model_path)->required();
  c_eval->add_option("--order", order_text, "free-edge order, e.g. '+a -b'");

  auto* c_export = app.add_subcommand("export", "export JSON or DOT");
  c_export->add_option("term", term)->required();
  c_export->add_option("--format", format)->check(CLI::IsMember({"json", "dot"}));
  c_export->add_option("-o,--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (c_check->parsed()) return cmd_check(term, as_json);

    if (c_canon->parsed()) {
      std::cout << bang::canonical_print(bang::must_validate(bang::parse_tensor(term)))
                << "\n";
      return kOk;
    }

    if (c_eq->parsed()) {
      bool eq = bang::equiv(bang::must_validate(bang::parse_tensor(term)),
                            bang::must_validate(bang::parse_tensor(term2)));
      std::cout << (eq ? "equivalent" : "distinct") << "\n";
      return eq ? kOk : kSemantic;
    }

    if (c_inst->parsed()) {
      auto t = bang::must_validate(bang::parse_tensor(term));
      auto insts = bang::enumerate_instances(t, max_exp);
      if (as_json) {
        json out = json::array();
        for (const auto& i : insts) out.push_back(bang::print_tensor(i));
        std::cout << out.dump(2) << "\n";
      } else {
        for (const auto& i : insts) std::cout << bang::print_tensor(i) << "\n";
      }
      return kOk;
    }

    if (c_op->parsed()) {
      auto t = bang::must_validate(bang::parse_tensor(term));
      std::string text = ops_text;
      std::replace(text.begin(), text.end(), ';', '\n');
      auto ops = bang::parse_op_seq(text);
      if (normalize) {
        auto norm = bang::normalize_ops(t, ops);
        std::cout << bang::to_string(norm) << "\n";
        std::cout << bang::print_tensor(bang::apply_ops(t, norm)) << "\n";
      } else {
        std::cout << bang::print_tensor(bang::apply_ops(t, ops)) << "\n";
      }
      return kOk;
    }

    if (c_prove->parsed())
      return cmd_prove(theory_path, proof_path, model_path, max_exp, as_json);

    if (c_eval->parsed()) {
      auto t = bang::must_validate(bang::parse_tensor(term));
      bang::Model m = bang::load_model(slurp(model_path));
      std::vector<bang::DirEdge> order =
          order_text.empty() ? t.free_edges() : parse_order(order_text);
      auto r = bang::evaluate(t, m, order);
      if (as_json) {
        json out;
        out["order"] = json::array();
        for (const auto& e : r.order) out["order"].push_back(edge_str(e));
        out["array"] = r.array;
        std::cout << out.dump(2) << "\n";
      } else {
        std::cout << "order:";
        for (const auto& e : r.order) std::cout << " " << edge_str(e);
        std::cout << "\narray:";
        for (auto v : r.array) std::cout << " " << v;
        std::cout << "\n";
      }
      return kOk;
    }

    if (c_export->parsed()) {
      auto t = bang::must_validate(bang::parse_tensor(term));
      std::string text =
          format == "json" ? bang::export_json(t) : bang::export_dot(t);
      if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
      } else {
        std::ofstream out(out_path);
        out << text;
      }
      return kOk;
    }
  } catch (const bang::ParseError& ex) {
    std::cerr << "parse error at line " << ex.span.line << ", column "
              << ex.span.column << ": " << ex.what() << "\n";
    return kUsage;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kSemantic;
  }
  return kUsage;
}
