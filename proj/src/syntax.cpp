#include "bang/syntax.hpp"

#include <cctype>
#include <map>
#include <sstream>

#include "json.hpp"

namespace bang {

namespace {

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
         c == '\'' || c == '.';
}

struct Lexer {
  const std::string& src;
  size_t pos = 0;

  explicit Lexer(const std::string& s) : src(s) {}

  SourceSpan span_at(size_t start, size_t end) const {
    SourceSpan s;
    s.start = start;
    s.end = end;
    s.line = 1;
    s.column = 1;
    for (size_t i = 0; i < start && i < src.size(); ++i) {
      if (src[i] == '\n') {
        s.line++;
        s.column = 1;
      } else {
        s.column++;
      }
    }
    return s;
  }

  void skip_ws() {
    while (pos < src.size() &&
           std::isspace(static_cast<unsigned char>(src[pos])))
      pos++;
  }

  bool eof() {
    skip_ws();
    return pos >= src.size();
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& msg) {
    size_t e = pos < src.size() ? pos + 1 : pos;
    throw ParseError(msg, span_at(pos, e));
  }

  void expect(char c) {
    skip_ws();
    if (pos >= src.size() || src[pos] != c)
      fail(std::string("expected '") + c + "'");
    pos++;
  }

  std::string name() {
    skip_ws();
    size_t start = pos;
    while (pos < src.size() && name_char(src[pos])) pos++;
    if (pos == start) fail("expected a name");
    return src.substr(start, pos - start);
  }
};

EdgeTerm parse_edgeterm(Lexer& lx) {
  EdgeTerm e;
  for (;;) {
    char c = lx.peek();
    if (c == '+' || c == '-') {
      lx.pos++;
      e.items.push_back(edge(c == '+' ? Dir::Out : Dir::In, lx.name()));
    } else if (c == '[') {
      lx.pos++;
      EdgeTerm body = parse_edgeterm(lx);
      lx.expect('>');
      e.items.push_back(group(true, lx.name(), std::move(body)));
    } else if (c == '<') {
      lx.pos++;
      EdgeTerm body = parse_edgeterm(lx);
      lx.expect(']');
      e.items.push_back(group(false, lx.name(), std::move(body)));
    } else {
      return e;
    }
  }
}

PreTensor parse_tensor_body(Lexer& lx);

Factor parse_factor(Lexer& lx) {
  char c = lx.peek();
  if (c == '[') {
    lx.pos++;
    PreTensor body;
    if (lx.peek() != ']') body = parse_tensor_body(lx);
    lx.expect(']');
    return bangbox(lx.name(), std::move(body));
  }
  std::string sym = lx.name();
  if (sym == "circle") return Factor{Circle{}};
  if (sym == "id") {
    lx.expect('(');
    lx.expect('+');
    std::string out = lx.name();
    lx.expect('-');
    std::string in = lx.name();
    lx.expect(')');
    return idwire(std::move(out), std::move(in));
  }
  lx.expect('(');
  EdgeTerm e = parse_edgeterm(lx);
  lx.expect(')');
  return atom(std::move(sym), std::move(e));
}

PreTensor parse_tensor_body(Lexer& lx) {
  PreTensor p;
  if (lx.peek() == '1') {
    size_t save = lx.pos;
    lx.pos++;
    // `1` is the unit only when it stands alone as a whole tensor
    if (lx.pos >= lx.src.size() || !name_char(lx.src[lx.pos])) {
      char c = lx.peek();
      if (c == '\0' || c == ']') return p;
    }
    lx.pos = save;
  }
  for (;;) {
    char c = lx.peek();
    if (c == '\0' || c == ']') break;
    p.factors.push_back(parse_factor(lx));
  }
  if (p.factors.empty()) lx.fail("expected a tensor");
  return p;
}

}  // namespace

PreTensor parse_tensor(const std::string& text) {
  Lexer lx(text);
  PreTensor p = parse_tensor_body(lx);
  if (!lx.eof()) lx.fail("unexpected trailing input");
  return normalize_pretensor(p);
}

std::string print_edgeterm(const EdgeTerm& e) {
  std::string out;
  for (const auto& item : e.items) {
    if (!out.empty()) out += ' ';
    if (const auto* d = std::get_if<DirEdge>(&item.v)) {
      out += d->dir == Dir::Out ? '+' : '-';
      out += d->name;
    } else {
      const auto& g = std::get<EdgeGroup>(item.v);
      if (g.clockwise)
        out += "[" + print_edgeterm(g.body) + ">" + g.box;
      else
        out += "<" + print_edgeterm(g.body) + "]" + g.box;
    }
  }
  return out;
}

std::string print_tensor(const PreTensor& t) {
  if (t.factors.empty()) return "1";
  std::string out;
  for (const auto& f : t.factors) {
    if (!out.empty()) out += ' ';
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      out += a->symbol + "(" + print_edgeterm(a->edges) + ")";
    } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
      out += "id(+" + w->out + " -" + w->in + ")";
    } else if (std::get_if<Circle>(&f.v)) {
      out += "circle";
    } else {
      const auto& b = std::get<BangBox>(f.v);
      out += "[" + (b.body.factors.empty() ? "" : print_tensor(b.body)) + "]" +
             b.box;
    }
  }
  return out;
}

std::string print_tensor(const Tensor& t) { return print_tensor(t.term()); }

// -- theory files ------------------------------------------------------------

namespace {

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

TheoryFile parse_theory(const std::string& text) {
  TheoryFile th;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  size_t offset = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    lineno++;
    size_t line_start = offset;
    offset += line.size() + 1;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    SourceSpan span;
    span.start = line_start;
    span.end = line_start + line.size();
    span.line = lineno;
    auto fail = [&](const std::string& msg) {
      throw ParseError(msg + " (line " + std::to_string(lineno) + ")", span);
    };
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "theory") {
      ls >> th.name;
      if (th.name.empty()) fail("theory needs a name");
    } else if (kw == "sym") {
      std::string name, colon, tok;
      ls >> name >> colon;
      if (name.empty() || colon != ":") fail("expected `sym <name> : ...`");
      AritySpec spec;
      std::string word;
      while (ls >> tok) word += tok;
      if (word == "var") {
        spec.variable = true;
      } else {
        spec.variable = false;
        for (char c : word)
          if (c != '^' && c != 'v') fail("arrangement must be over ^ and v");
        spec.arrangement = word;
      }
      if (!th.signature.symbols.emplace(name, spec).second)
        fail("duplicate symbol " + name);
    } else if (kw == "rule" || kw == "lemma") {
      std::string rest = strip(line.substr(kw.size()));
      auto colon = rest.find(':');
      if (colon == std::string::npos) fail("expected `" + kw + " <name>: ...`");
      TheoryRule r;
      r.name = strip(rest.substr(0, colon));
      r.is_lemma = (kw == "lemma");
      r.span = span;
      std::string body = rest.substr(colon + 1);
      auto eq = body.find('=');
      if (eq == std::string::npos) fail("expected `<tensor> = <tensor>`");
      r.lhs_src = strip(body.substr(0, eq));
      r.rhs_src = strip(body.substr(eq + 1));
      if (r.name.empty() || r.lhs_src.empty() || r.rhs_src.empty())
        fail("malformed " + kw);
      if (seen[r.name]++) fail("duplicate rule name " + r.name);
      th.rules.push_back(std::move(r));
    } else {
      fail("unknown directive `" + kw + "`");
    }
  }
  return th;
}

// -- JSON export -------------------------------------------------------------

namespace {

using nlohmann::json;

json to_json(const EdgeTerm& e) {
  json items = json::array();
  for (const auto& item : e.items) {
    if (const auto* d = std::get_if<DirEdge>(&item.v)) {
      items.push_back({{"kind", "edge"},
                       {"dir", d->dir == Dir::Out ? "out" : "in"},
                       {"name", d->name}});
    } else {
      const auto& g = std::get<EdgeGroup>(item.v);
      items.push_back({{"kind", "group"},
                       {"clockwise", g.clockwise},
                       {"box", g.box},
                       {"body", to_json(g.body)}});
    }
  }
  return items;
}

json to_json(const PreTensor& p) {
  json factors = json::array();
  for (const auto& f : p.factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      factors.push_back(
          {{"kind", "atom"}, {"symbol", a->symbol}, {"edges", to_json(a->edges)}});
    } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
      factors.push_back({{"kind", "id"}, {"out", w->out}, {"in", w->in}});
    } else if (std::get_if<Circle>(&f.v)) {
      factors.push_back({{"kind", "circle"}});
    } else {
      const auto& b = std::get<BangBox>(f.v);
      factors.push_back(
          {{"kind", "box"}, {"box", b.box}, {"body", to_json(b.body)}});
    }
  }
  return {{"factors", factors}};
}

EdgeTerm edgeterm_from_json(const json& items) {
  EdgeTerm e;
  for (const auto& item : items) {
    std::string kind = item.at("kind");
    if (kind == "edge") {
      e.items.push_back(edge(
          item.at("dir") == "out" ? Dir::Out : Dir::In, item.at("name")));
    } else if (kind == "group") {
      e.items.push_back(group(item.at("clockwise"), item.at("box"),
                              edgeterm_from_json(item.at("body"))));
    } else {
      throw std::runtime_error("bad edge item kind: " + kind);
    }
  }
  return e;
}

PreTensor pretensor_from_json(const json& j) {
  PreTensor p;
  for (const auto& f : j.at("factors")) {
    std::string kind = f.at("kind");
    if (kind == "atom") {
      p.factors.push_back(
          atom(f.at("symbol"), edgeterm_from_json(f.at("edges"))));
    } else if (kind == "id") {
      p.factors.push_back(idwire(f.at("out"), f.at("in")));
    } else if (kind == "circle") {
      p.factors.push_back(Factor{Circle{}});
    } else if (kind == "box") {
      p.factors.push_back(bangbox(f.at("box"), pretensor_from_json(f.at("body"))));
    } else {
      throw std::runtime_error("bad factor kind: " + kind);
    }
  }
  return p;
}

}  // namespace

std::string export_json(const PreTensor& t) { return to_json(t).dump(2); }
std::string export_json(const Tensor& t) { return export_json(t.term()); }

PreTensor import_json(const std::string& text) {
  return pretensor_from_json(json::parse(text));
}

// -- DOT export --------------------------------------------------------------

namespace {

struct DotEmitter {
  std::ostringstream out;
  int next_id = 0;
  // edge name -> (node id, "+"/"-", group boxes inside-out)
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> ends;

  std::string fresh_node() { return "n" + std::to_string(next_id++); }

  void edgeterm(const EdgeTerm& e, const std::string& node,
                std::vector<std::string>& gstack) {
    for (const auto& item : e.items) {
      if (const auto* d = std::get_if<DirEdge>(&item.v)) {
        std::string attrs;
        if (!gstack.empty()) {
          attrs = "groups=";
          for (size_t i = gstack.size(); i-- > 0;) {
            attrs += gstack[i];
            if (i) attrs += ",";
          }
        }
        ends[d->name].push_back(
            {node + "|" + (d->dir == Dir::Out ? "+" : "-"), attrs});
      } else {
        const auto& g = std::get<EdgeGroup>(item.v);
        gstack.push_back(g.box + (g.clockwise ? ":cw" : ":acw"));
        edgeterm(g.body, node, gstack);
        gstack.pop_back();
      }
    }
  }

  void pretensor(const PreTensor& p, const std::string& indent) {
    for (const auto& f : p.factors) {
      if (const auto* a = std::get_if<Atom>(&f.v)) {
        std::string id = fresh_node();
        out << indent << id << " [label=\"" << a->symbol << "\"];\n";
        std::vector<std::string> gstack;
        edgeterm(a->edges, id, gstack);
      } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
        std::string id = fresh_node();
        out << indent << id << " [label=\"id\", shape=point];\n";
        ends[w->out].push_back({id + "|+", ""});
        ends[w->in].push_back({id + "|-", ""});
      } else if (std::get_if<Circle>(&f.v)) {
        std::string id = fresh_node();
        out << indent << id << " [label=\"circle\", shape=circle];\n";
      } else {
        const auto& b = std::get<BangBox>(f.v);
        out << indent << "subgraph cluster_" << b.box << " {\n";
        out << indent << "  label=\"" << b.box << "\";\n";
        pretensor(b.body, indent + "  ");
        out << indent << "}\n";
      }
    }
  }
};

}  // namespace

std::string export_dot(const Tensor& t) {
  DotEmitter em;
  em.out << "digraph bang {\n";
  em.pretensor(t.term(), "  ");
  for (const auto& [name, occs] : em.ends) {
    auto node_of = [](const std::string& s) {
      return s.substr(0, s.find('|'));
    };
    auto dir_of = [](const std::string& s) {
      return s.substr(s.find('|') + 1);
    };
    std::string attrs;
    for (const auto& [end, groups] : occs)
      if (!groups.empty()) {
        (void)end;
        if (!attrs.empty()) attrs += " ";
        attrs += groups;
      }
    std::string label = name + (attrs.empty() ? "" : " [" + attrs + "]");
    if (occs.size() == 2) {
      // bound pair; draw from the Out end to the In end
      const auto& a = occs[0];
      const auto& b = occs[1];
      std::string src = dir_of(a.first) == "+" ? node_of(a.first) : node_of(b.first);
      std::string dst = dir_of(a.first) == "+" ? node_of(b.first) : node_of(a.first);
      em.out << "  " << src << " -> " << dst << " [label=\"" << label
             << "\"];\n";
    } else {
      std::string term = "t_" + name;
      em.out << "  " << term << " [shape=none, label=\"\"];\n";
      const auto& a = occs[0];
      if (dir_of(a.first) == "+")
        em.out << "  " << node_of(a.first) << " -> " << term << " [label=\""
               << label << "\"];\n";
      else
        em.out << "  " << term << " -> " << node_of(a.first) << " [label=\""
               << label << "\"];\n";
    }
  }
  em.out << "}\n";
  return em.out.str();
}

}  // namespace bang
