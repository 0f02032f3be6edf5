#include "mc2/aiger_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mc2 {

namespace {

struct Cursor {
  const std::string &text;
  size_t pos = 0;
  unsigned line = 1;

  bool eof() const { return pos >= text.size(); }
  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(line, msg);
  }
  unsigned number() {
    if (eof() || !isdigit((unsigned char)text[pos])) fail("expected number");
    unsigned value = 0;
    auto [end, err] =
        std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (err != std::errc()) fail("number out of range");
    pos = end - text.data();
    return value;
  }
  void space() {
    if (eof() || text[pos] != ' ') fail("expected space");
    ++pos;
  }
  void newline() {
    if (eof() || text[pos] != '\n') fail("expected end of line");
    ++pos;
    ++line;
  }
  std::string rest_of_line() {
    size_t start = pos;
    while (!eof() && text[pos] != '\n') ++pos;
    std::string s = text.substr(start, pos - start);
    if (!eof()) ++pos, ++line;
    return s;
  }
};

}  // namespace

Circuit parse_aiger(const std::string &text) {
  Cursor in{text};
  if (text.compare(0, 4, "aag ") != 0) in.fail("expected 'aag' header");
  in.pos = 4;
  unsigned M = in.number();
  in.space();
  unsigned I = in.number();
  in.space();
  unsigned L = in.number();
  in.space();
  unsigned O = in.number();
  in.space();
  unsigned A = in.number();
  if (O != 1) in.fail("expected exactly one output");
  if (M != I + L + A) in.fail("header mismatch: M != I + L + A");
  in.newline();

  Circuit c;
  c.num_inputs = I;
  c.input_names.resize(I);
  c.latch_names.resize(L);
  const unsigned max_lit = 2 * M + 1;
  auto check_lit = [&](unsigned l, const char *what) {
    if (l > max_lit)
      in.fail(std::string("undefined literal ") + std::to_string(l) + " in " +
              what);
    return l;
  };
  for (unsigned i = 0; i < I; ++i) {
    unsigned l = in.number();
    if (l != 2 * (i + 1)) in.fail("input literal out of sequence");
    in.newline();
  }
  for (unsigned i = 0; i < L; ++i) {
    unsigned lit = in.number();
    if (lit != 2 * (I + i + 1)) in.fail("latch literal out of sequence");
    in.space();
    unsigned next = check_lit(in.number(), "latch next");
    unsigned reset = 0;
    if (!in.eof() && in.text[in.pos] == ' ') {
      in.space();
      reset = check_lit(in.number(), "latch reset");
    }
    in.newline();
    c.latches.push_back({I + i + 1, next, reset});
  }
  c.bad = check_lit(in.number(), "output");
  in.newline();
  for (unsigned i = 0; i < A; ++i) {
    unsigned lhs = in.number();
    if (lhs != 2 * (I + L + i + 1)) in.fail("and literal out of sequence");
    in.space();
    unsigned rhs0 = check_lit(in.number(), "and");
    in.space();
    unsigned rhs1 = check_lit(in.number(), "and");
    in.newline();
    if (var_of(rhs0) >= var_of(lhs) || var_of(rhs1) >= var_of(lhs))
      in.fail("and gate not topologically ordered");
    c.ands.push_back({I + L + i + 1, rhs0, rhs1});
  }
  // symbol table and comments
  while (!in.eof()) {
    char kind = in.text[in.pos];
    if (kind == 'c') {
      in.rest_of_line();
      while (!in.eof()) c.comments.push_back(in.rest_of_line());
      break;
    }
    if (kind != 'i' && kind != 'l' && kind != 'o')
      in.fail("expected symbol or comment section");
    ++in.pos;
    unsigned idx = in.number();
    unsigned limit = kind == 'i' ? I : kind == 'l' ? L : 1;
    if (idx >= limit) in.fail("symbol index out of range");
    in.space();
    std::string name = in.rest_of_line();
    if (kind == 'i') {
      if (!c.input_names[idx].empty()) in.fail("duplicate input symbol");
      c.input_names[idx] = name;
    } else if (kind == 'l') {
      if (!c.latch_names[idx].empty()) in.fail("duplicate latch symbol");
      c.latch_names[idx] = name;
    } else {
      c.output_name = name;
    }
  }
  c.validate();
  return c;
}

Circuit read_aiger_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_aiger(ss.str());
}

std::string write_aiger(const Circuit &c) {
  c.validate();
  std::ostringstream out;
  out << "aag " << c.num_vars() << ' ' << c.num_inputs << ' '
      << c.num_latches() << " 1 " << c.num_ands() << '\n';
  for (unsigned i = 0; i < c.num_inputs; ++i) out << 2 * (i + 1) << '\n';
  for (const Latch &l : c.latches) {
    out << 2 * l.var << ' ' << l.next;
    if (l.reset != 0) out << ' ' << l.reset;
    out << '\n';
  }
  out << c.bad << '\n';
  for (const AndGate &g : c.ands)
    out << 2 * g.var << ' ' << g.rhs0 << ' ' << g.rhs1 << '\n';
  for (unsigned i = 0; i < c.num_inputs; ++i)
    if (i < c.input_names.size() && !c.input_names[i].empty())
      out << 'i' << i << ' ' << c.input_names[i] << '\n';
  for (unsigned i = 0; i < c.num_latches(); ++i)
    if (i < c.latch_names.size() && !c.latch_names[i].empty())
      out << 'l' << i << ' ' << c.latch_names[i] << '\n';
  if (!c.output_name.empty()) out << "o0 " << c.output_name << '\n';
  if (!c.comments.empty()) {
    out << "c\n";
    for (const std::string &s : c.comments) out << s << '\n';
  }
  return out.str();
}

void write_aiger_file(const Circuit &c, const std::string &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << write_aiger(c);
}

std::optional<Lit> declared_property(const Circuit &c) {
  for (const std::string &s : c.comments)
    if (s.rfind("PROPERTY ", 0) == 0) {
      unsigned l = 0;
      auto [end, err] =
          std::from_chars(s.data() + 9, s.data() + s.size(), l);
      if (err == std::errc() && var_of(l) <= c.num_vars()) return Lit(l);
    }
  return std::nullopt;
}

void set_declared_property(Circuit &c, Lit l) {
  c.comments.push_back("PROPERTY " + std::to_string(l));
}

int TseitinResult::lit(Lit l) const {
  if (l == lit_false) return -1;
  if (l == lit_true) return 1;
  int v = var_map[var_of(l)];
  return sign_of(l) ? -v : v;
}

TseitinResult tseitin(const Circuit &comb, std::span<const Lit> roots) {
  if (comb.num_latches() != 0)
    throw Error("tseitin: circuit has latches");
  TseitinResult r;
  // dimacs var 1 is reserved for constant true
  r.var_map.assign(comb.num_vars() + 1, 0);
  for (unsigned v = 1; v <= comb.num_vars(); ++v) r.var_map[v] = (int)v + 1;
  r.cnf.num_vars = (int)comb.num_vars() + 1;
  // drop duplicate literals and tautological clauses
  auto push = [&r](std::vector<int> cl) {
    std::sort(cl.begin(), cl.end(),
              [](int a, int b) { return std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b); });
    cl.erase(std::unique(cl.begin(), cl.end()), cl.end());
    for (size_t i = 0; i + 1 < cl.size(); ++i)
      if (cl[i] == -cl[i + 1]) return;
    r.cnf.clauses.push_back(std::move(cl));
  };
  push({1});
  for (const AndGate &g : comb.ands) {
    int o = r.lit(make_lit(g.var));
    int a = r.lit(g.rhs0);
    int b = r.lit(g.rhs1);
    push({-o, a});
    push({-o, b});
    push({o, -a, -b});
  }
  for (Lit root : roots) push({r.lit(root)});
  return r;
}

std::string write_dimacs(const CnfFormula &f) {
  std::ostringstream out;
  out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for (const auto &cl : f.clauses) {
    for (int l : cl) out << l << ' ';
    out << "0\n";
  }
  return out.str();
}

}  // namespace mc2
