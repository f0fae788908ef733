#include "bang/model.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "bang/syntax.hpp"

namespace bang {

namespace {

using json = nlohmann::json;

bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t k = 2; k * k <= p; ++k)
    if (p % k == 0) return false;
  return true;
}

size_t pow_d(int d, size_t n) {
  size_t r = 1;
  while (n--) r *= static_cast<size_t>(d);
  return r;
}

void flatten(const json& j, int d, size_t depth, size_t rank,
             std::vector<std::int64_t>& out, const std::string& where) {
  if (depth == rank) {
    if (!j.is_number_integer())
      throw std::runtime_error(where + ": expected an integer at depth " +
                               std::to_string(depth));
    out.push_back(j.get<std::int64_t>());
    return;
  }
  if (j.is_array() && !j.empty() && j[0].is_number_integer() && depth == 0 &&
      j.size() == pow_d(d, rank)) {
    // flat row-major form
    for (const auto& v : j) {
      if (!v.is_number_integer())
        throw std::runtime_error(where + ": expected integers");
      out.push_back(v.get<std::int64_t>());
    }
    return;
  }
  if (!j.is_array() || j.size() != static_cast<size_t>(d))
    throw std::runtime_error(where + ": expected a nested array of shape d^" +
                             std::to_string(rank) + " with d=" +
                             std::to_string(d));
  for (const auto& v : j) flatten(v, d, depth + 1, rank, out, where);
}

}  // namespace

const std::vector<std::int64_t>* Model::lookup(
    const std::string& symbol, const std::string& arrangement) const {
  auto it = entries.find({symbol, arrangement});
  return it == entries.end() ? nullptr : &it->second;
}

Model load_model(const std::string& json_text) {
  json j = json::parse(json_text);
  Model m;
  m.d = j.at("d").get<int>();
  m.p = j.at("p").get<std::int64_t>();
  if (m.d < 1) throw std::runtime_error("model dimension must be >= 1");
  if (!is_prime(m.p))
    throw std::runtime_error("model modulus " + std::to_string(m.p) +
                             " is not prime");
  for (const auto& [sym, table] : j.at("symbols").items()) {
    for (const auto& [arr, data] : table.items()) {
      for (char c : arr)
        if (c != '^' && c != 'v')
          throw std::runtime_error("symbol " + sym +
                                   ": arrangement must be over ^/v, got " +
                                   arr);
      std::vector<std::int64_t> flat;
      flatten(data, m.d, 0, arr.size(), flat, "symbol " + sym + " (" + arr + ")");
      if (flat.size() != pow_d(m.d, arr.size()))
        throw std::runtime_error("symbol " + sym + " (" + arr +
                                 "): expected shape d^" +
                                 std::to_string(arr.size()));
      for (auto& v : flat) v = ((v % m.p) + m.p) % m.p;
      m.entries[{sym, arr}] = std::move(flat);
    }
  }
  return m;
}

// -- evaluation --------------------------------------------------------------

namespace {

// dense array with one label per axis; row-major, first label slowest
struct Lab {
  std::vector<std::string> names;
  std::vector<std::int64_t> data;
};

struct EvalSetup {
  std::vector<Lab> factors;
  std::int64_t circle_factor = 1;
};

EvalSetup setup(const Tensor& t, const Model& m) {
  if (!t.box_free())
    throw std::runtime_error("cannot evaluate a term with !-boxes");
  EvalSetup s;
  for (const auto& f : t.term().factors) {
    if (const auto* a = std::get_if<Atom>(&f.v)) {
      std::string arr = arrangement_of(a->edges);
      const auto* entry = m.lookup(a->symbol, arr);
      if (!entry)
        throw std::runtime_error("model has no entry for symbol " + a->symbol +
                                 " with arrangement " +
                                 (arr.empty() ? "(scalar)" : arr));
      Lab l;
      for (const auto& item : a->edges.items)
        l.names.push_back(std::get<DirEdge>(item.v).name);
      l.data = *entry;
      s.factors.push_back(std::move(l));
    } else if (const auto* w = std::get_if<IdWire>(&f.v)) {
      Lab l;
      l.names = {w->out, w->in};
      l.data.assign(pow_d(m.d, 2), 0);
      for (int i = 0; i < m.d; ++i)
        l.data[static_cast<size_t>(i) * m.d + i] = 1;
      s.factors.push_back(std::move(l));
    } else if (std::get_if<Circle>(&f.v)) {
      s.circle_factor = (s.circle_factor * (m.d % m.p)) % m.p;
    } else {
      throw std::runtime_error("cannot evaluate a term with !-boxes");
    }
  }
  return s;
}

// sums over every axis labeled n within a single factor (trace) or across
// two factors (contraction already merged into one by the caller)
Lab self_contract(const Lab& a, const std::string& n, int d, std::int64_t p) {
  std::vector<size_t> keep, hit;
  for (size_t i = 0; i < a.names.size(); ++i)
    (a.names[i] == n ? hit : keep).push_back(i);
  Lab r;
  for (size_t i : keep) r.names.push_back(a.names[i]);
  r.data.assign(pow_d(d, keep.size()), 0);
  std::vector<int> idx(a.names.size(), 0);
  size_t total = pow_d(d, a.names.size());
  for (size_t flat = 0; flat < total; ++flat) {
    size_t rest = flat;
    for (size_t i = a.names.size(); i-- > 0;) {
      idx[i] = static_cast<int>(rest % d);
      rest /= d;
    }
    bool diag = true;
    for (size_t i = 1; i < hit.size(); ++i)
      if (idx[hit[i]] != idx[hit[0]]) diag = false;
    if (!diag) continue;
    size_t out = 0;
    for (size_t i : keep) out = out * d + static_cast<size_t>(idx[i]);
    r.data[out] = (r.data[out] + a.data[flat]) % p;
  }
  return r;
}

Lab outer(const Lab& a, const Lab& b, int d, std::int64_t p) {
  Lab r;
  r.names = a.names;
  r.names.insert(r.names.end(), b.names.begin(), b.names.end());
  r.data.assign(a.data.size() * b.data.size(), 0);
  for (size_t i = 0; i < a.data.size(); ++i)
    for (size_t j = 0; j < b.data.size(); ++j)
      r.data[i * b.data.size() + j] = (a.data[i] * b.data[j]) % p;
  (void)d;
  return r;
}

Lab permute_to(const Lab& a, const std::vector<std::string>& order, int d,
               std::int64_t p) {
  if (a.names.size() != order.size())
    throw std::logic_error("axis count mismatch in permute");
  std::vector<size_t> src;
  for (const auto& n : order) {
    auto it = std::find(a.names.begin(), a.names.end(), n);
    if (it == a.names.end())
      throw std::runtime_error("order names unknown axis " + n);
    src.push_back(static_cast<size_t>(it - a.names.begin()));
  }
  Lab r;
  r.names = order;
  r.data.assign(a.data.size(), 0);
  std::vector<int> idx(order.size(), 0);
  for (size_t flat = 0; flat < r.data.size(); ++flat) {
    size_t rest = flat;
    for (size_t i = order.size(); i-- > 0;) {
      idx[i] = static_cast<int>(rest % d);
      rest /= d;
    }
    size_t in = 0;
    std::vector<int> src_idx(order.size(), 0);
    for (size_t i = 0; i < order.size(); ++i) src_idx[src[i]] = idx[i];
    for (size_t i = 0; i < order.size(); ++i)
      in = in * d + static_cast<size_t>(src_idx[i]);
    r.data[flat] = a.data[in] % p;
  }
  return r;
}

std::vector<std::string> check_order(const Tensor& t,
                                     const std::vector<DirEdge>& order) {
  std::set<DirEdge> want(t.free_edges().begin(), t.free_edges().end());
  if (order.size() != want.size())
    throw std::runtime_error("order must list each free edge exactly once");
  std::vector<std::string> names;
  for (const auto& e : order) {
    if (!want.erase(e))
      throw std::runtime_error("order entry " +
                               std::string(e.dir == Dir::Out ? "+" : "-") +
                               e.name + " is not a free edge");
    names.push_back(e.name);
  }
  return names;
}

}  // namespace

EvalResult evaluate(const Tensor& t, const Model& m,
                    const std::vector<DirEdge>& order) {
  auto names = check_order(t, order);
  EvalSetup s = setup(t, m);

  std::vector<Lab> work = std::move(s.factors);
  for (const auto& bn : t.bound_names()) {
    // merge the factors carrying this name, then trace it out
    std::vector<size_t> holders;
    for (size_t i = 0; i < work.size(); ++i)
      if (std::count(work[i].names.begin(), work[i].names.end(), bn))
        holders.push_back(i);
    if (holders.empty()) continue;  // contracted away syntactically
    Lab merged = work[holders[0]];
    for (size_t i = 1; i < holders.size(); ++i)
      merged = outer(merged, work[holders[i]], m.d, m.p);
    merged = self_contract(merged, bn, m.d, m.p);
    for (size_t i = holders.size(); i-- > 0;)
      work.erase(work.begin() + static_cast<long>(holders[i]));
    work.push_back(std::move(merged));
  }
  Lab acc;
  acc.data = {1 % m.p};
  for (const auto& l : work) acc = outer(acc, l, m.d, m.p);
  for (auto& v : acc.data) v = (v * s.circle_factor) % m.p;
  acc = permute_to(acc, names, m.d, m.p);

  EvalResult r;
  r.order = order;
  r.array = std::move(acc.data);
  r.circle_factor = s.circle_factor;
  return r;
}

EvalResult naive_contract(const Tensor& t, const Model& m,
                          const std::vector<DirEdge>& order) {
  auto names = check_order(t, order);
  EvalSetup s = setup(t, m);

  std::vector<std::string> all = names;
  for (const auto& bn : t.bound_names()) all.push_back(bn);
  std::map<std::string, int> assign;

  EvalResult r;
  r.order = order;
  r.circle_factor = s.circle_factor;
  r.array.assign(pow_d(m.d, names.size()), 0);

  size_t total = pow_d(m.d, all.size());
  for (size_t flat = 0; flat < total; ++flat) {
    size_t rest = flat;
    for (size_t i = all.size(); i-- > 0;) {
      assign[all[i]] = static_cast<int>(rest % m.d);
      rest /= m.d;
    }
    std::int64_t prod = s.circle_factor;
    for (const auto& l : s.factors) {
      size_t idx = 0;
      for (const auto& n : l.names)
        idx = idx * static_cast<size_t>(m.d) + static_cast<size_t>(assign[n]);
      prod = (prod * l.data[idx]) % m.p;
      if (prod == 0) break;
    }
    size_t out = 0;
    for (const auto& n : names)
      out = out * static_cast<size_t>(m.d) + static_cast<size_t>(assign[n]);
    r.array[out] = (r.array[out] + prod) % m.p;
  }
  return r;
}

// -- checking equations ------------------------------------------------------

namespace {

std::vector<std::string> top_boxes(const Tensor& t) {
  std::vector<std::string> r;
  for (const auto& b : t.boxes())
    if (!t.box_parent().count(b)) r.push_back(b);
  return r;
}

bool check_go(const Equation& e, std::map<std::string, int> budget, int max_exp,
              const Model& m, const Signature& sig, ModelVerdict& v) {
  auto tops = top_boxes(e.lhs);
  if (tops.empty()) {
    std::vector<DirEdge> order = e.lhs.free_edges();
    EvalResult l = evaluate(e.lhs, m, order);
    EvalResult r = evaluate(e.rhs, m, order);
    ++v.instances_checked;
    if (l.array != r.array) {
      size_t at = 0;
      while (at < l.array.size() && l.array[at] == r.array[at]) ++at;
      v.ok = false;
      v.message = "counterexample instance " + print_tensor(e.lhs) + " = " +
                  print_tensor(e.rhs) + " differs at flat index " +
                  std::to_string(at);
      return false;
    }
    return true;
  }
  const std::string& b = *std::min_element(tops.begin(), tops.end());
  int r = budget.count(b) ? budget[b] : max_exp;
  if (!check_go(eq_op(e, OpStep{OpKind::Kill, b, {}, {}}, sig), budget, max_exp,
                m, sig, v))
    return false;
  if (r > 0) {
    OpStep done;
    Equation e2 = eq_op(e, OpStep{OpKind::Exp, b, {}, {}}, sig, &done);
    auto budget2 = budget;
    budget2[b] = r - 1;
    for (const auto& [orig, img] : done.fresh.boxes) budget2[img] = r - 1;
    if (!check_go(e2, std::move(budget2), max_exp, m, sig, v)) return false;
  }
  return true;
}

}  // namespace

ModelVerdict check_rule_in_model(const Equation& e, const Model& m, int max_exp,
                                 const Signature& sig) {
  ModelVerdict v;
  check_go(e, {}, max_exp, m, sig, v);
  return v;
}

}  // namespace bang
