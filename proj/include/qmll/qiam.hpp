#pragma once

// The quantum interaction abstract machine. A token travels over the
// formula occurrences of a proof carrying a context (which atom of the
// formula it stands on), a stack of box/diamond symbols recording the
// q-rule ports crossed on the way in, and a quantum register of
// depth(context) + |stack| qubits. The register changes only when the
// token leaves a q-rule box.
//
// Register ordering: qubit 1 is the modality closest to the atom at the
// hole, counting outward through the context; the stack supplies the
// remaining qubits with its top adjacent to the context.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmll/error.hpp"
#include "qmll/formula.hpp"
#include "qmll/matrix.hpp"
#include "qmll/proof.hpp"

namespace qmll {

// A gate acting on qubits offset+1 .. offset+k of a register.
struct EmbeddedGate {
  UnitaryMatrix unitary;
  std::size_t offset = 0;
};

struct GateEvent {
  UnitaryMatrix gate;  // the q-rule's own unitary
  std::size_t offset = 0;
  bool adjoint = false;  // true when the box is left through its diamond port
  NodePath node;         // the q-rule that fired

  UnitaryMatrix effective() const { return adjoint ? qmll::adjoint(gate) : gate; }
};

// Flattened view of a proof: every node with its parent link and the
// number of qubits its occurrences carry on the stack.
class OccurrenceGraph {
 public:
  struct Node {
    Proof proof;
    NodePath path;
    int parent = -1;
    std::size_t childIndex = 0;
    std::vector<std::size_t> children;
    // Sum of the arities of the q-rules strictly below this node (towards
    // the root): the stack length of any legal state on its conclusion.
    std::size_t boxDepth = 0;
  };

  explicit OccurrenceGraph(Proof p) : root_(std::move(p)) {
    if (!root_.valid()) throw PreconditionError("machine: proof does not check: " + check(root_).str());
    NodePath path;
    add(root_, -1, 0, path, 0);
  }

  const Proof& proof() const { return root_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t k) const { return nodes_[k]; }

  std::size_t find(const NodePath& path) const {
    std::size_t k = 0;
    for (int step : path) {
      if (step < 0 || static_cast<std::size_t>(step) >= nodes_[k].children.size())
        throw PreconditionError("machine: bad node path " + printPath(path));
      k = nodes_[k].children[static_cast<std::size_t>(step)];
    }
    return k;
  }

  const Formula& formula(std::size_t node, std::size_t position) const {
    return nodes_[node].proof.conclusion().at(position);
  }

  // Number of (occurrence, context, stack) triples with a legal stack,
  // saturating at the largest uint64.
  std::uint64_t legalStateCount() const {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t total = 0;
    for (const auto& n : nodes_) {
      if (n.boxDepth >= 63) return kMax;
      for (const auto& f : n.proof.conclusion()) {
        const std::uint64_t stacks = std::uint64_t{1} << n.boxDepth;
        const std::uint64_t here = f.atomCount() * stacks;
        if (here / stacks != f.atomCount() || total > kMax - here) return kMax;
        total += here;
      }
    }
    return total;
  }

 private:
  void add(const Proof& p, int parent, std::size_t childIndex, NodePath& path,
           std::size_t boxDepth) {
    const std::size_t self = nodes_.size();
    nodes_.push_back(Node{p, path, parent, childIndex, {}, boxDepth});
    const bool box = p.rule() == Rule::Quantum;
    for (std::size_t k = 0; k < p.premises().size(); ++k) {
      path.push_back(static_cast<int>(k));
      const std::size_t child = nodes_.size();
      nodes_[self].children.push_back(child);
      add(p.premise(k), static_cast<int>(self), k, path, boxDepth + (box ? p.arity() : 0));
      path.pop_back();
    }
  }

  Proof root_;
  std::vector<Node> nodes_;
};

// The register-free part of a machine state.
struct Token {
  std::size_t node = 0;
  std::size_t position = 0;
  Context context;
  Stack stack;

  friend bool operator==(const Token&, const Token&) = default;
};

struct MachineState {
  Token token;
  StateVector reg;
};

struct TokenStep {
  enum class Outcome : std::uint8_t { Moved, Final, Stuck };
  Outcome outcome = Outcome::Stuck;
  Token next;
  std::optional<GateEvent> event;
};

inline OccurrenceId occurrenceOf(const OccurrenceGraph& g, const Token& t) {
  return OccurrenceId{g.node(t.node).path, t.position};
}

inline Polarity tokenPolarity(const OccurrenceGraph& g, const Token& t) {
  auto pol = t.context.polarityFor(g.formula(t.node, t.position));
  if (!pol)
    throw PreconditionError("machine: context " + printContext(t.context) + " does not fit " +
                            printFormula(g.formula(t.node, t.position)));
  return *pol;
}

// One transition. Negative contexts move the token up (towards the axioms),
// positive ones down (towards the conclusion).
inline TokenStep stepToken(const OccurrenceGraph& g, const Token& t) {
  const auto& here = g.node(t.node);
  const Proof& p = here.proof;
  auto moved = [](std::size_t node, std::size_t pos, Context c, Stack s) {
    return TokenStep{TokenStep::Outcome::Moved, Token{node, pos, std::move(c), std::move(s)}, {}};
  };

  if (tokenPolarity(g, t) == Polarity::Negative) {
    switch (p.rule()) {
      case Rule::Axiom:
        return moved(t.node, 1 - t.position, t.context.dual(), t.stack);
      case Rule::Quantum: {
        const std::size_t n = p.arity();
        const Modality m = t.position == 0 ? Modality::Diamond : Modality::Box;
        if (!t.context.hasOuterModal(m, n)) return {};
        Stack s = t.stack;
        s.push(m, n);
        return moved(here.children[0], t.position, t.context.withoutOuter(n), std::move(s));
      }
      default:
        break;
    }
    if (auto origin = conclusionOrigin(p, t.position))
      return moved(here.children[origin->premise], origin->position, t.context, t.stack);
    // Principal par/tensor formula: the outer frame says which side to enter.
    const bool left = t.context.outer().side == Context::Side::Left;
    const std::size_t premise = p.rule() == Rule::Tensor && !left ? 1 : 0;
    return moved(here.children[premise], left ? p.i() : p.j(), t.context.withoutOuter(), t.stack);
  }

  if (here.parent < 0) {
    TokenStep r;
    r.outcome = t.stack.empty() ? TokenStep::Outcome::Final : TokenStep::Outcome::Stuck;
    r.next = t;
    return r;
  }
  const auto parentIndex = static_cast<std::size_t>(here.parent);
  const auto& parent = g.node(parentIndex);
  const Proof& y = parent.proof;
  const Descent d = premiseDestination(y, here.childIndex, t.position);
  switch (d.kind) {
    case Descent::Kind::Conclusion:
      return moved(parentIndex, d.position, t.context, t.stack);
    case Descent::Kind::CutFormula: {
      const std::size_t other = 1 - here.childIndex;
      return moved(parent.children[other], other == 0 ? y.i() : y.j(), t.context.dual(), t.stack);
    }
    case Descent::Kind::Principal:
      break;
  }

  if (y.rule() == Rule::Quantum) {
    const std::size_t n = y.arity();
    auto top = t.stack.uniformTop(n);
    if (!top) return {};
    Stack s = t.stack;
    s.pop(n);
    // Leaving through the diamond port after entering through the box port
    // applies U*; the converse crossing applies U.
    const Modality exitKind = t.position == 0 ? Modality::Diamond : Modality::Box;
    TokenStep r = moved(parentIndex, t.position, t.context.withOuterModal(exitKind, n), std::move(s));
    if (*top != exitKind)
      r.event = GateEvent{y.gate().unitary, t.context.depth(), exitKind == Modality::Diamond,
                          parent.path};
    return r;
  }

  Context::Frame frame{y.rule() == Rule::Par ? Formula::Kind::Par : Formula::Kind::Tensor,
                       Context::Side::Left, std::nullopt};
  if (y.rule() == Rule::Par) {
    const bool left = t.position == y.i();
    frame.side = left ? Context::Side::Left : Context::Side::Right;
    frame.sibling = p.conclusion()[left ? y.j() : y.i()];
  } else {
    const bool left = here.childIndex == 0;
    frame.side = left ? Context::Side::Left : Context::Side::Right;
    frame.sibling = left ? g.node(parent.children[1]).proof.conclusion()[y.j()]
                         : g.node(parent.children[0]).proof.conclusion()[y.i()];
  }
  return moved(parentIndex, y.conclusion().size() - 1, t.context.withOuter(std::move(frame)), t.stack);
}

// Register-carrying step; Final and Stuck leave the state unchanged.
struct MachineStep {
  TokenStep::Outcome outcome;
  MachineState state;
  std::optional<GateEvent> event;
};

inline MachineStep stepMachine(const OccurrenceGraph& g, const MachineState& s) {
  TokenStep r = stepToken(g, s.token);
  if (r.outcome != TokenStep::Outcome::Moved) return {r.outcome, s, std::nullopt};
  StateVector reg = r.event ? applyAt(r.event->effective(), s.reg, r.event->offset) : s.reg;
  return {r.outcome, MachineState{std::move(r.next), std::move(reg)}, std::move(r.event)};
}

struct TokenRun {
  Token exit;
  std::vector<GateEvent> events;
  std::size_t steps = 0;
};

using TokenObserver = std::function<void(std::size_t step, const Token&, const GateEvent*)>;

// Runs the token to a final state without a register. Throws
// BoundExceeded past the legal-state count and Error on a stuck state.
inline TokenRun runToken(const OccurrenceGraph& g, Token start, const TokenObserver& observe = {}) {
  const std::uint64_t bound = g.legalStateCount();
  TokenRun run{std::move(start), {}, 0};
  if (observe) observe(0, run.exit, nullptr);
  for (;;) {
    TokenStep r = stepToken(g, run.exit);
    if (r.outcome == TokenStep::Outcome::Final) return run;
    if (r.outcome == TokenStep::Outcome::Stuck)
      throw Error("machine: stuck at " + occurrenceOf(g, run.exit).str() + " with stack " +
                  run.exit.stack.str());
    if (++run.steps > bound)
      throw BoundExceeded("machine: exceeded " + std::to_string(bound) + " steps");
    run.exit = std::move(r.next);
    if (r.event) run.events.push_back(*r.event);
    if (observe) observe(run.steps, run.exit, r.event ? &run.events.back() : nullptr);
  }
}

struct MachineRun {
  MachineState final;
  std::vector<GateEvent> events;
  std::size_t steps = 0;
};

inline MachineRun run(const OccurrenceGraph& g, MachineState initial,
                      const TokenObserver& observe = {}) {
  const std::size_t size = initial.token.context.depth() + initial.token.stack.size();
  if (initial.reg.qubits() != size)
    throw PreconditionError("machine: register has " + std::to_string(initial.reg.qubits()) +
                            " qubits, state needs " + std::to_string(size));
  TokenRun t = runToken(g, initial.token, observe);
  StateVector reg = std::move(initial.reg);
  for (const auto& e : t.events) reg = applyAt(e.effective(), reg, e.offset);
  return {MachineState{std::move(t.exit), std::move(reg)}, std::move(t.events), t.steps};
}

// ---------------------------------------------------------------------------
// Semantics relative to an entry occurrence of the conclusion.

struct SemanticsResult {
  std::size_t entryPosition = 0;
  Context entryContext;
  std::size_t exitPosition = 0;
  Context exitContext;
  UnitaryMatrix unitary = UnitaryMatrix::identity(0);
  std::vector<GateEvent> events;
  std::size_t steps = 0;
};

inline Token initialToken(const OccurrenceGraph& g, std::size_t position, const Context& n) {
  const Sequent& conclusion = g.proof().conclusion();
  if (position >= conclusion.size())
    throw PreconditionError("entry position " + std::to_string(position + 1) +
                            " is not in the conclusion");
  auto pol = n.polarityFor(conclusion[position]);
  if (!pol || *pol != Polarity::Negative)
    throw PreconditionError("context " + printContext(n) + " is not a negative context for " +
                            printFormula(conclusion[position]));
  return Token{0, position, n, Stack()};
}

// The first negative context of the formula, if any.
inline std::optional<Context> firstNegativeContext(const Formula& f) {
  for (auto& e : contextsFor(f))
    if (e.polarity == Polarity::Negative) return e.context;
  return std::nullopt;
}

inline SemanticsResult semanticsRelative(const OccurrenceGraph& g, std::size_t position,
                                         const Context& n, const TokenObserver& observe = {}) {
  TokenRun t = runToken(g, initialToken(g, position, n), observe);
  const std::size_t q = n.depth();
  ComplexMatrix u = ComplexMatrix::identity(std::size_t{1} << q);
  for (const auto& e : t.events) u = matmul(embed(e.effective(), e.offset, q), u);
  SemanticsResult r;
  r.entryPosition = position;
  r.entryContext = n;
  r.exitPosition = t.exit.position;
  r.exitContext = t.exit.context;
  r.unitary = UnitaryMatrix(std::move(u), kSemanticTolerance);
  r.events = std::move(t.events);
  r.steps = t.steps;
  return r;
}

inline SemanticsResult semanticsRelative(const Proof& p, std::size_t position, const Context& n) {
  return semanticsRelative(OccurrenceGraph(p), position, n);
}

// Gate list in application order whose composition is the semantics.
inline std::vector<EmbeddedGate> extractGateSequence(const Proof& p, std::size_t position,
                                                     const Context& n) {
  std::vector<EmbeddedGate> out;
  for (const auto& e : semanticsRelative(p, position, n).events)
    out.push_back({e.effective(), e.offset});
  return out;
}

}  // namespace qmll
