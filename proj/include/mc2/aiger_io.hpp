#pragma once

// Extended AIGER ASCII ("aag") reading/writing plus Tseitin translation
// to CNF. The extension: a latch's reset field may be any literal, not
// just {0, 1, self}. Standard files parse unchanged.

#include <iosfwd>
#include <string>
#include <vector>

#include "mc2/netlist.hpp"

namespace mc2 {

struct ParseError : Error {
  ParseError(unsigned line, const std::string &msg)
      : Error("line " + std::to_string(line) + ": " + msg), line(line) {}
  unsigned line;
};

Circuit parse_aiger(const std::string &text);
Circuit read_aiger_file(const std::string &path);

// Canonical form: reset field omitted when 0, symbols and comments
// emitted as stored. write(parse(t)) == t for canonical t.
std::string write_aiger(const Circuit &c);
void write_aiger_file(const Circuit &c, const std::string &path);

// Comment convention: a witness may declare a property separate from
// its inductive invariant with a comment line "PROPERTY <lit>".
std::optional<Lit> declared_property(const Circuit &c);
void set_declared_property(Circuit &c, Lit l);

struct CnfFormula {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
};

struct TseitinResult {
  CnfFormula cnf;
  std::vector<int> var_map;  // circuit var -> dimacs var (0 if unmapped)
  int lit(Lit l) const;      // dimacs literal for a circuit literal
};

// Equisatisfiable encoding of a combinational circuit: three clauses
// per AND gate plus unit clauses asserting each root.
TseitinResult tseitin(const Circuit &comb, std::span<const Lit> roots);

std::string write_dimacs(const CnfFormula &f);

}  // namespace mc2
