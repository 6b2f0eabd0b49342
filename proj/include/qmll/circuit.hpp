#pragma once

// Unitary circuits: encoding as proofs, extraction from proofs through the
// machine, and a plain state-vector simulator.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmll/error.hpp"
#include "qmll/formula.hpp"
#include "qmll/matrix.hpp"
#include "qmll/proof.hpp"
#include "qmll/qiam.hpp"

namespace qmll {

struct CircuitGate {
  UnitaryMatrix unitary;
  std::vector<std::size_t> targets;  // 1-based, strictly increasing
  std::string name;                  // library name, or empty
};

struct Circuit {
  std::size_t qubits = 0;
  std::vector<CircuitGate> gates;

  void add(UnitaryMatrix u, std::vector<std::size_t> targets) {
    auto name = gates::nameOf(u);
    gates.push_back({std::move(u), std::move(targets), name ? *name : std::string()});
  }
  void add(const std::string& name, std::vector<std::size_t> targets) {
    auto u = gates::byName(name);
    if (!u) throw PreconditionError("unknown gate " + name);
    gates.push_back({std::move(*u), std::move(targets), name});
  }
};

inline void validate(const Circuit& c) {
  for (std::size_t k = 0; k < c.gates.size(); ++k) {
    const auto& g = c.gates[k];
    const std::string where = "gate " + std::to_string(k + 1) + ": ";
    if (g.targets.size() != g.unitary.qubits())
      throw PreconditionError(where + "acts on " + std::to_string(g.unitary.qubits()) +
                              " qubits but lists " + std::to_string(g.targets.size()) + " targets");
    for (std::size_t t = 0; t < g.targets.size(); ++t) {
      if (g.targets[t] < 1 || g.targets[t] > c.qubits)
        throw PreconditionError(where + "target " + std::to_string(g.targets[t]) +
                                " outside 1.." + std::to_string(c.qubits));
      if (t > 0 && g.targets[t] <= g.targets[t - 1])
        throw PreconditionError(where + "targets must be strictly increasing");
    }
  }
}

// Places a gate on a contiguous block. Non-contiguous targets are handled
// by conjugating U (x) I with the qubit permutation that moves the targets
// to the front of their covering block.
inline EmbeddedGate embedGate(const CircuitGate& g, std::size_t m) {
  Circuit probe{m, {g}};
  validate(probe);
  const std::size_t lo = g.targets.front(), hi = g.targets.back();
  const std::size_t k = g.targets.size();
  if (hi - lo + 1 == k) return {g.unitary, lo - 1};

  const std::size_t b = hi - lo + 1;
  std::vector<std::size_t> order;  // block-local qubit placed at each slot
  for (auto t : g.targets) order.push_back(t - lo);
  for (std::size_t q = 0; q < b; ++q)
    if (std::find(order.begin(), order.end(), q) == order.end()) order.push_back(q);

  const std::size_t dim = std::size_t{1} << b;
  auto bit = [&](std::size_t x, std::size_t q) { return (x >> (b - 1 - q)) & 1U; };
  ComplexMatrix perm(dim, dim);
  for (std::size_t x = 0; x < dim; ++x) {
    std::size_t y = 0;
    for (std::size_t slot = 0; slot < b; ++slot) y |= bit(x, order[slot]) << (b - 1 - slot);
    perm(y, x) = 1.0;
  }
  ComplexMatrix padded = kron(g.unitary.matrix(), ComplexMatrix::identity(std::size_t{1} << (b - k)));
  ComplexMatrix u = matmul(adjoint(perm), matmul(padded, perm));
  return {UnitaryMatrix(std::move(u), kSemanticTolerance), lo - 1};
}

namespace detail {

inline Proof encodeLayer(std::vector<EmbeddedGate> layer, std::size_t m, const Formula& atom) {
  std::sort(layer.begin(), layer.end(),
            [](const EmbeddedGate& a, const EmbeddedGate& b) { return a.offset < b.offset; });
  Proof p = Proof::axiom(atom);
  std::size_t depth = 0;
  auto pad = [&](std::size_t to) {
    for (; depth < to; ++depth) p = Proof::quantum(1, Gate::named("I1"), p);
  };
  for (auto& g : layer) {
    pad(g.offset);
    const std::size_t k = g.unitary.qubits();
    auto name = gates::nameOf(g.unitary);
    p = Proof::quantum(k, Gate{std::move(g.unitary), name ? *name : std::string()}, p);
    depth += k;
  }
  pad(m);
  return p;
}

}  // namespace detail

// Encodes c as a proof of |- <>^m ~a, []^m a. Gates are grouped greedily
// into layers of pairwise disjoint blocks; each layer is one tower of
// q-rules padded with identities, and consecutive layers are composed by
// cuts, earlier layers on the left.
inline Proof encode(const Circuit& c, const std::string& atomName = "a") {
  validate(c);
  const Formula atom = Formula::atom(atomName);
  if (c.gates.empty()) {
    if (c.qubits == 0) return Proof::axiom(atom);
    return Proof::quantum(c.qubits, Gate::named(gates::identityName(c.qubits)), Proof::axiom(atom));
  }
  std::vector<std::vector<EmbeddedGate>> layers;
  auto overlaps = [](const EmbeddedGate& a, const EmbeddedGate& b) {
    return a.offset < b.offset + b.unitary.qubits() && b.offset < a.offset + a.unitary.qubits();
  };
  for (const auto& g : c.gates) {
    EmbeddedGate e = embedGate(g, c.qubits);
    bool fits = !layers.empty();
    if (fits)
      for (const auto& other : layers.back()) fits = fits && !overlaps(e, other);
    if (!fits) layers.emplace_back();
    layers.back().push_back(std::move(e));
  }
  Proof p = detail::encodeLayer(layers[0], c.qubits, atom);
  for (std::size_t k = 1; k < layers.size(); ++k)
    p = Proof::cut(1, 0, p, detail::encodeLayer(layers[k], c.qubits, atom));
  return p;
}

// The circuit the machine runs from `position` under the negative context n.
inline Circuit extract(const Proof& p, std::size_t position, const Context& n,
                       bool pruneIdentity = false) {
  Circuit c;
  c.qubits = n.depth();
  for (auto& g : extractGateSequence(p, position, n)) {
    if (pruneIdentity && g.unitary.isIdentity(1e-12)) continue;
    std::vector<std::size_t> targets;
    for (std::size_t q = 1; q <= g.unitary.qubits(); ++q) targets.push_back(g.offset + q);
    c.add(std::move(g.unitary), std::move(targets));
  }
  return c;
}

inline StateVector simulate(const Circuit& c, StateVector state) {
  validate(c);
  if (state.qubits() != c.qubits)
    throw PreconditionError("simulate: register has " + std::to_string(state.qubits()) +
                            " qubits, circuit has " + std::to_string(c.qubits));
  for (const auto& g : c.gates) {
    EmbeddedGate e = embedGate(g, c.qubits);
    state = applyAt(e.unitary, state, e.offset);
  }
  return state;
}

// The full 2^m x 2^m matrix of c, column by column.
inline ComplexMatrix circuitMatrix(const Circuit& c) {
  const std::size_t dim = std::size_t{1} << c.qubits;
  ComplexMatrix m(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    StateVector out = simulate(c, StateVector::basis(c.qubits, col));
    for (std::size_t row = 0; row < dim; ++row) m(row, col) = out[row];
  }
  return m;
}

}  // namespace qmll
