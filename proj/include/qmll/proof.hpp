#pragma once

// Proof trees of the quantum multiplicative calculus.
//
// Sequents are ordered; rules address their active formulas by position.
// Conclusion layouts (0-based positions inside the library, 1-based in text):
//
//   (ax F)            |- ~F, F
//   (cut i j L R)     |- L\i, R\j                 L[i] and R[j] dual
//   (par i j P)       |- P\{i,j}, P[i] % P[j]
//   (tensor i j L R)  |- L\i, R\j, L[i] * R[j]
//   (q n U P)         |- <>^n P[1], []^n P[2]      P has exactly two formulas
//   (ex (k1 .. km) P) |- P[k1], .., P[km]          exchange
//
// A q-rule premise must be two modal formulas or two non-modal ones.

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qmll/error.hpp"
#include "qmll/formula.hpp"
#include "qmll/matrix.hpp"

namespace qmll {

using Sequent = std::vector<Formula>;

// A unitary annotation with an optional library name used for printing.
struct Gate {
  UnitaryMatrix unitary;
  std::string label;

  static Gate named(const std::string& name) {
    auto u = gates::byName(name);
    if (!u) throw PreconditionError("unknown gate '" + name + "'");
    return Gate{*u, name == "I" ? "I1" : name};
  }
  static Gate raw(UnitaryMatrix u) { return Gate{std::move(u), {}}; }
};

enum class Rule : std::uint8_t { Axiom, Cut, Par, Tensor, Quantum, Exchange };

inline const char* ruleName(Rule r) {
  switch (r) {
    case Rule::Axiom:
      return "ax";
    case Rule::Cut:
      return "cut";
    case Rule::Par:
      return "par";
    case Rule::Tensor:
      return "tensor";
    case Rule::Quantum:
      return "q";
    case Rule::Exchange:
      return "ex";
  }
  return "?";
}

// Child indices from the root; premise 0 is the left one.
using NodePath = std::vector<int>;

inline std::string printPath(const NodePath& path) {
  if (path.empty()) return "/";
  std::string s;
  for (int k : path) s += "/" + std::to_string(k + 1);
  return s;
}

struct OccurrenceId {
  NodePath node;
  std::size_t position = 0;

  std::string str() const { return printPath(node) + "#" + std::to_string(position + 1); }
  friend bool operator==(const OccurrenceId&, const OccurrenceId&) = default;
  friend auto operator<=>(const OccurrenceId&, const OccurrenceId&) = default;
};

class Proof {
 public:
  static Proof axiom(Formula f);
  static Proof cut(std::size_t i, std::size_t j, Proof left, Proof right);
  static Proof par(std::size_t i, std::size_t j, Proof premise);
  static Proof tensor(std::size_t i, std::size_t j, Proof left, Proof right);
  static Proof quantum(std::size_t n, Gate gate, Proof premise);
  static Proof exchange(std::vector<std::size_t> perm, Proof premise);

  Rule rule() const { return node_->rule; }
  const Formula& axiomFormula() const { return *node_->formula; }
  std::size_t i() const { return node_->i; }
  std::size_t j() const { return node_->j; }
  std::size_t arity() const { return node_->arity; }
  const Gate& gate() const { return *node_->gate; }
  const std::vector<std::size_t>& permutation() const { return node_->perm; }
  const std::vector<Proof>& premises() const { return node_->premises; }
  const Proof& premise(std::size_t k) const { return node_->premises.at(k); }

  // True when this node and every node above it is well formed.
  bool valid() const { return node_->valid; }
  // Well-formedness message of this node alone; empty when fine.
  const std::string& localError() const { return node_->error; }
  const Sequent& conclusion() const {
    if (!node_->valid) throw PreconditionError("proof is not well formed: " + node_->error);
    return node_->conclusion;
  }

  // Logical rule instances (exchanges excluded).
  std::size_t ruleCount() const { return node_->rules; }
  std::size_t nodeCount() const { return node_->nodes; }
  // Largest sum of q-rule arities along a branch from this node upwards.
  std::size_t quantumHeight() const { return node_->qheight; }

  const void* identity() const { return node_.get(); }
  friend bool sameNode(const Proof& a, const Proof& b) { return a.node_ == b.node_; }

 private:
  struct Node {
    Rule rule = Rule::Axiom;
    std::optional<Formula> formula;
    std::size_t i = 0, j = 0, arity = 0;
    std::optional<Gate> gate;
    std::vector<std::size_t> perm;
    std::vector<Proof> premises;
    Sequent conclusion;
    bool valid = true;
    std::string error;
    std::size_t rules = 0, nodes = 1, qheight = 0;
  };

  explicit Proof(std::shared_ptr<Node> n);
  static std::shared_ptr<Node> make(Rule r, std::vector<Proof> premises);

  std::shared_ptr<const Node> node_;
};

namespace detail {

template <class T>
std::vector<T> without(const std::vector<T>& v, std::size_t k) {
  std::vector<T> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (i != k) out.push_back(v[i]);
  return out;
}

inline std::string pos1(std::size_t k) { return std::to_string(k + 1); }

}  // namespace detail

inline Proof::Proof(std::shared_ptr<Node> n) : node_(std::move(n)) {}

inline std::shared_ptr<Proof::Node> Proof::make(Rule r, std::vector<Proof> premises) {
  auto n = std::make_shared<Node>();
  n->rule = r;
  n->rules = r == Rule::Exchange ? 0 : 1;
  for (const auto& p : premises) {
    n->valid = n->valid && p.valid();
    n->rules += p.ruleCount();
    n->nodes += p.nodeCount();
    n->qheight = std::max(n->qheight, p.quantumHeight());
  }
  if (!n->valid) n->error = "premise is not well formed";
  n->premises = std::move(premises);
  return n;
}

inline Proof Proof::axiom(Formula f) {
  auto n = make(Rule::Axiom, {});
  n->conclusion = {f.dual(), f};
  n->formula = std::move(f);
  return Proof(n);
}

inline Proof Proof::cut(std::size_t i, std::size_t j, Proof left, Proof right) {
  auto n = make(Rule::Cut, {left, right});
  n->i = i;
  n->j = j;
  if (n->valid) {
    const Sequent& l = left.conclusion();
    const Sequent& r = right.conclusion();
    if (i >= l.size() || j >= r.size()) {
      n->valid = false;
      n->error = "cut position out of range";
    } else if (l[i].dual() != r[j]) {
      n->valid = false;
      n->error = "cut formulas " + printFormula(l[i]) + " and " + printFormula(r[j]) +
                 " are not dual";
    } else {
      n->conclusion = detail::without(l, i);
      auto rest = detail::without(r, j);
      n->conclusion.insert(n->conclusion.end(), rest.begin(), rest.end());
      if (n->conclusion.empty()) {
        n->valid = false;
        n->error = "cut concludes the empty sequent";
      }
    }
  }
  return Proof(n);
}

inline Proof Proof::par(std::size_t i, std::size_t j, Proof premise) {
  auto n = make(Rule::Par, {premise});
  n->i = i;
  n->j = j;
  if (n->valid) {
    const Sequent& p = premise.conclusion();
    if (i >= p.size() || j >= p.size() || i == j) {
      n->valid = false;
      n->error = "par positions must be two distinct positions of the premise";
    } else {
      for (std::size_t k = 0; k < p.size(); ++k)
        if (k != i && k != j) n->conclusion.push_back(p[k]);
      n->conclusion.push_back(Formula::par(p[i], p[j]));
    }
  }
  return Proof(n);
}

inline Proof Proof::tensor(std::size_t i, std::size_t j, Proof left, Proof right) {
  auto n = make(Rule::Tensor, {left, right});
  n->i = i;
  n->j = j;
  if (n->valid) {
    const Sequent& l = left.conclusion();
    const Sequent& r = right.conclusion();
    if (i >= l.size() || j >= r.size()) {
      n->valid = false;
      n->error = "tensor position out of range";
    } else {
      n->conclusion = detail::without(l, i);
      auto rest = detail::without(r, j);
      n->conclusion.insert(n->conclusion.end(), rest.begin(), rest.end());
      n->conclusion.push_back(Formula::tensor(l[i], r[j]));
    }
  }
  return Proof(n);
}

inline Proof Proof::quantum(std::size_t arity, Gate gate, Proof premise) {
  auto n = make(Rule::Quantum, {premise});
  n->arity = arity;
  n->qheight += arity;
  if (n->valid) {
    const Sequent& p = premise.conclusion();
    if (arity == 0) {
      n->valid = false;
      n->error = "quantum rule arity must be at least 1";
    } else if (gate.unitary.qubits() != arity) {
      n->valid = false;
      n->error = "dimension violation: gate acts on " + std::to_string(gate.unitary.qubits()) +
                 " qubit(s) but the rule adds " + std::to_string(arity) + " modalities";
    } else if (p.size() != 2) {
      n->valid = false;
      n->error = "quantum rule premise must have exactly two formulas, found " +
                 std::to_string(p.size());
    } else if (p[0].isModal() != p[1].isModal()) {
      n->valid = false;
      n->error = "modality-consistency violation: premise " + printFormula(p[0]) + ", " +
                 printFormula(p[1]) + " mixes a modal and a non-modal formula";
    } else {
      n->conclusion = {Formula::modal(Modality::Diamond, arity, p[0]),
                       Formula::modal(Modality::Box, arity, p[1])};
    }
  }
  n->gate = std::move(gate);
  return Proof(n);
}

inline Proof Proof::exchange(std::vector<std::size_t> perm, Proof premise) {
  auto n = make(Rule::Exchange, {premise});
  if (n->valid) {
    const Sequent& p = premise.conclusion();
    std::vector<bool> seen(p.size(), false);
    bool ok = perm.size() == p.size();
    for (std::size_t k : perm) {
      if (!ok || k >= p.size() || seen[k]) {
        ok = false;
        break;
      }
      seen[k] = true;
    }
    if (!ok) {
      n->valid = false;
      n->error = "exchange is not a permutation of the premise positions";
    } else {
      for (std::size_t k : perm) n->conclusion.push_back(p[k]);
    }
  }
  n->perm = std::move(perm);
  return Proof(n);
}

// ---------------------------------------------------------------------------
// Occurrence linkage between a node's conclusion and its premises.

struct PremiseLink {
  std::size_t premise;
  std::size_t position;
  friend bool operator==(const PremiseLink&, const PremiseLink&) = default;
};

// Premise occurrence of a non-principal conclusion occurrence; nullopt for
// principal formulas (axiom sides, par/tensor results, q-rule formulas).
inline std::optional<PremiseLink> conclusionOrigin(const Proof& p, std::size_t pos) {
  auto skip = [](std::size_t q, std::size_t removed) { return q < removed ? q : q + 1; };
  switch (p.rule()) {
    case Rule::Axiom:
    case Rule::Quantum:
      return std::nullopt;
    case Rule::Exchange:
      return PremiseLink{0, p.permutation()[pos]};
    case Rule::Cut:
    case Rule::Tensor: {
      const std::size_t leftRest = p.premise(0).conclusion().size() - 1;
      const std::size_t rightRest = p.premise(1).conclusion().size() - 1;
      if (pos < leftRest) return PremiseLink{0, skip(pos, p.i())};
      if (pos < leftRest + rightRest) return PremiseLink{1, skip(pos - leftRest, p.j())};
      return std::nullopt;
    }
    case Rule::Par: {
      const std::size_t rest = p.premise(0).conclusion().size() - 2;
      if (pos >= rest) return std::nullopt;
      std::size_t q = 0;
      for (std::size_t seen = 0;; ++q) {
        if (q == p.i() || q == p.j()) continue;
        if (seen == pos) break;
        ++seen;
      }
      return PremiseLink{0, q};
    }
  }
  return std::nullopt;
}

// Where a premise occurrence goes: to a conclusion position, into the
// principal formula of the rule, or across a cut.
struct Descent {
  enum class Kind : std::uint8_t { Conclusion, Principal, CutFormula };
  Kind kind;
  std::size_t position;  // conclusion position for Conclusion/Principal
};

inline Descent premiseDestination(const Proof& p, std::size_t premise, std::size_t q) {
  auto compress = [](std::size_t k, std::size_t removed) { return k < removed ? k : k - 1; };
  const std::size_t last = p.conclusion().size() - 1;
  switch (p.rule()) {
    case Rule::Axiom:
      break;
    case Rule::Exchange:
      for (std::size_t k = 0; k < p.permutation().size(); ++k)
        if (p.permutation()[k] == q) return {Descent::Kind::Conclusion, k};
      break;
    case Rule::Quantum:
      return {Descent::Kind::Principal, q};
    case Rule::Par:
      if (q == p.i() || q == p.j()) return {Descent::Kind::Principal, last};
      {
        std::size_t k = q;
        if (q > p.i()) --k;
        if (q > p.j()) --k;
        return {Descent::Kind::Conclusion, k};
      }
    case Rule::Cut:
    case Rule::Tensor: {
      const std::size_t removed = premise == 0 ? p.i() : p.j();
      if (q == removed)
        return {p.rule() == Rule::Cut ? Descent::Kind::CutFormula : Descent::Kind::Principal,
                p.rule() == Rule::Cut ? 0 : last};
      const std::size_t offset = premise == 0 ? 0 : p.premise(0).conclusion().size() - 1;
      return {Descent::Kind::Conclusion, offset + compress(q, removed)};
    }
  }
  throw PreconditionError("premiseDestination: bad premise occurrence");
}

// ---------------------------------------------------------------------------
// Navigation and checking.

inline const Proof& subproofAt(const Proof& p, const NodePath& path) {
  const Proof* cur = &p;
  for (int k : path) {
    if (k < 0 || static_cast<std::size_t>(k) >= cur->premises().size())
      throw PreconditionError("bad node path " + printPath(path));
    cur = &cur->premise(static_cast<std::size_t>(k));
  }
  return *cur;
}

struct CheckReport {
  bool ok = true;
  NodePath path;
  std::string message;

  std::string str() const {
    return ok ? std::string("ok") : "error at " + printPath(path) + ": " + message;
  }
};

// Reports the first ill-formed node in post-order (the deepest root cause).
inline CheckReport check(const Proof& p) {
  CheckReport report;
  NodePath path;
  auto visit = [&](auto&& self, const Proof& q) -> bool {
    if (q.valid()) return true;
    for (std::size_t k = 0; k < q.premises().size(); ++k) {
      path.push_back(static_cast<int>(k));
      bool ok = self(self, q.premise(k));
      path.pop_back();
      if (!ok) return false;
    }
    report.ok = false;
    report.path = path;
    report.message = q.localError();
    return false;
  };
  visit(visit, p);
  return report;
}

// Occurrences introduced (or cut) by the rule at `path`.
inline std::vector<OccurrenceId> principalFormulas(const Proof& root, const NodePath& path) {
  const Proof& p = subproofAt(root, path);
  std::vector<OccurrenceId> out;
  auto child = [&](int k) {
    NodePath c = path;
    c.push_back(k);
    return c;
  };
  switch (p.rule()) {
    case Rule::Axiom:
    case Rule::Quantum:
      out.push_back({path, 0});
      out.push_back({path, 1});
      break;
    case Rule::Par:
    case Rule::Tensor:
      out.push_back({path, p.conclusion().size() - 1});
      break;
    case Rule::Cut:
      out.push_back({child(0), p.i()});
      out.push_back({child(1), p.j()});
      break;
    case Rule::Exchange:
      break;
  }
  return out;
}

// Structural equality; gates compared entry-wise within tol.
inline bool approxSameProof(const Proof& a, const Proof& b, double tol = 1e-9) {
  if (sameNode(a, b)) return true;
  if (a.rule() != b.rule() || a.premises().size() != b.premises().size()) return false;
  switch (a.rule()) {
    case Rule::Axiom:
      if (a.axiomFormula() != b.axiomFormula()) return false;
      break;
    case Rule::Cut:
    case Rule::Par:
    case Rule::Tensor:
      if (a.i() != b.i() || a.j() != b.j()) return false;
      break;
    case Rule::Quantum:
      if (a.arity() != b.arity() || a.gate().unitary.dim() != b.gate().unitary.dim() ||
          !approxEqual(a.gate().unitary.matrix(), b.gate().unitary.matrix(), tol))
        return false;
      break;
    case Rule::Exchange:
      if (a.permutation() != b.permutation()) return false;
      break;
  }
  for (std::size_t k = 0; k < a.premises().size(); ++k)
    if (!approxSameProof(a.premise(k), b.premise(k), tol)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Text format.

inline std::string formatReal(double x) {
  if (x == 0.0) x = 0.0;  // no negative zero in output
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string printMatrixLiteral(const ComplexMatrix& m) {
  std::string s = "(mat";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    s += " [";
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) s += ",";
      s += "[" + formatReal(m(r, c).real()) + "," + formatReal(m(r, c).imag()) + "]";
    }
    s += "]";
  }
  return s + ")";
}

inline std::string printGate(const Gate& g) {
  return g.label.empty() ? printMatrixLiteral(g.unitary.matrix()) : g.label;
}

inline void printProof(const Proof& p, std::string& out) {
  using detail::pos1;
  out += '(';
  out += ruleName(p.rule());
  switch (p.rule()) {
    case Rule::Axiom:
      out += ' ';
      printFormula(p.axiomFormula(), out);
      break;
    case Rule::Cut:
    case Rule::Par:
    case Rule::Tensor:
      out += ' ' + pos1(p.i()) + ' ' + pos1(p.j());
      break;
    case Rule::Quantum:
      out += ' ' + std::to_string(p.arity()) + ' ' + printGate(p.gate());
      break;
    case Rule::Exchange:
      out += " (";
      for (std::size_t k = 0; k < p.permutation().size(); ++k) {
        if (k) out += ' ';
        out += pos1(p.permutation()[k]);
      }
      out += ')';
      break;
  }
  for (const auto& q : p.premises()) {
    out += ' ';
    printProof(q, out);
  }
  out += ')';
}

inline std::string printProof(const Proof& p) {
  std::string out;
  printProof(p, out);
  return out;
}

inline std::string printSequent(const Sequent& s) {
  std::string out = "|-";
  for (std::size_t k = 0; k < s.size(); ++k) {
    out += k ? ", " : " ";
    printFormula(s[k], out);
  }
  return out;
}

namespace detail {

inline std::size_t readNatural(TextCursor& in) {
  std::string t = in.token();
  std::size_t v = 0;
  for (char c : t) {
    if (c < '0' || c > '9') in.fail("expected a natural number, got '" + t + "'");
    v = v * 10 + static_cast<std::size_t>(c - '0');
    if (v > 1'000'000) in.fail("number too large");
  }
  return v;
}

inline std::size_t readPosition(TextCursor& in) {
  std::size_t v = readNatural(in);
  if (v == 0) in.fail("positions are 1-based");
  return v - 1;
}

inline double readReal(TextCursor& in) {
  std::string t = in.token();
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) in.fail("bad number '" + t + "'");
    return v;
  } catch (const std::logic_error&) {
    in.fail("bad number '" + t + "'");
  }
}

// (mat [[re,im],...] [[re,im],...] ...) after the opening "(mat".
inline ComplexMatrix readMatrixRows(TextCursor& in) {
  std::vector<std::vector<Complex>> rows;
  while (in.accept("[")) {
    std::vector<Complex> row;
    while (in.accept("[")) {
      double re = readReal(in);
      in.accept(",");
      double im = readReal(in);
      in.expect("]");
      row.emplace_back(re, im);
      in.accept(",");
    }
    in.expect("]");
    rows.push_back(std::move(row));
    in.accept(",");
  }
  in.expect(")");
  if (rows.empty()) in.fail("empty matrix literal");
  std::vector<Complex> entries;
  for (const auto& r : rows) {
    if (r.size() != rows[0].size()) in.fail("ragged matrix literal");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  return ComplexMatrix(rows.size(), rows[0].size(), std::move(entries));
}

inline Gate readGate(TextCursor& in) {
  if (in.accept("(")) {
    in.expect("mat");
    std::size_t at = in.position();
    ComplexMatrix m = readMatrixRows(in);
    try {
      return Gate::raw(UnitaryMatrix(std::move(m)));
    } catch (const PreconditionError& e) {
      throw SyntaxError(e.what(), at);
    }
  }
  std::size_t at = in.position();
  std::string name = in.identifier();
  if (!gates::byName(name)) throw SyntaxError("unknown gate '" + name + "'", at);
  return Gate::named(name);
}

inline Proof readProof(TextCursor& in) {
  in.expect("(");
  std::string head = in.identifier();
  Proof result = [&]() -> Proof {
    if (head == "ax") return Proof::axiom(parseFormula(in));
    if (head == "cut" || head == "tensor") {
      std::size_t i = readPosition(in);
      std::size_t j = readPosition(in);
      Proof l = readProof(in);
      Proof r = readProof(in);
      return head == "cut" ? Proof::cut(i, j, std::move(l), std::move(r))
                           : Proof::tensor(i, j, std::move(l), std::move(r));
    }
    if (head == "par") {
      std::size_t i = readPosition(in);
      std::size_t j = readPosition(in);
      return Proof::par(i, j, readProof(in));
    }
    if (head == "q") {
      std::size_t n = readNatural(in);
      Gate g = readGate(in);
      return Proof::quantum(n, std::move(g), readProof(in));
    }
    if (head == "ex") {
      in.expect("(");
      std::vector<std::size_t> perm;
      while (!in.accept(")")) perm.push_back(readPosition(in));
      return Proof::exchange(std::move(perm), readProof(in));
    }
    in.fail("unknown rule '" + head + "'");
  }();
  in.expect(")");
  return result;
}

}  // namespace detail

// A proof text that parsed but does not check.
class CheckFailure : public Error {
 public:
  explicit CheckFailure(CheckReport r) : Error(r.str()), report_(std::move(r)) {}
  const CheckReport& report() const { return report_; }

 private:
  CheckReport report_;
};

// Parses without rejecting ill-formed proofs; use check() on the result.
inline Proof parseProofUnchecked(std::string_view text) {
  TextCursor in(text);
  Proof p = detail::readProof(in);
  if (!in.atEnd()) in.fail("trailing input after proof");
  return p;
}

inline Proof parseProof(std::string_view text) {
  Proof p = parseProofUnchecked(text);
  CheckReport r = check(p);
  if (!r.ok) throw CheckFailure(std::move(r));
  return p;
}

}  // namespace qmll
