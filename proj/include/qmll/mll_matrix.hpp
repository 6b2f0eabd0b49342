#pragma once

// Cut-free MLL proofs as permutation matrices: the adjacency matrix of the
// axiom links over the atom occurrences of the conclusion, numbered left to
// right across the sequent.

#include <cstddef>
#include <utility>
#include <vector>

#include "qmll/matrix.hpp"
#include "qmll/proof.hpp"

namespace qmll {

namespace detail {

// For each conclusion formula, the axiom-leaf ids of its atoms left to right.
inline std::vector<std::vector<std::size_t>> atomLeaves(
    const Proof& p, std::vector<std::pair<std::size_t, std::size_t>>& links) {
  using Leaves = std::vector<std::vector<std::size_t>>;
  switch (p.rule()) {
    case Rule::Axiom: {
      if (!p.axiomFormula().isAtom())
        throw PreconditionError("mll-matrix: non-atomic axiom on " + printFormula(p.axiomFormula()));
      std::size_t a = links.size() * 2, b = a + 1;
      links.emplace_back(a, b);
      return {{a}, {b}};
    }
    case Rule::Cut:
      throw PreconditionError("mll-matrix: proof contains a cut");
    case Rule::Quantum:
      throw PreconditionError("mll-matrix: proof contains a quantum rule");
    case Rule::Exchange: {
      Leaves in = atomLeaves(p.premise(0), links), out;
      for (std::size_t k : p.permutation()) out.push_back(in[k]);
      return out;
    }
    case Rule::Par: {
      Leaves in = atomLeaves(p.premise(0), links), out;
      for (std::size_t k = 0; k < in.size(); ++k)
        if (k != p.i() && k != p.j()) out.push_back(in[k]);
      std::vector<std::size_t> joined = in[p.i()];
      joined.insert(joined.end(), in[p.j()].begin(), in[p.j()].end());
      out.push_back(std::move(joined));
      return out;
    }
    case Rule::Tensor: {
      Leaves l = atomLeaves(p.premise(0), links);
      Leaves r = atomLeaves(p.premise(1), links), out;
      for (std::size_t k = 0; k < l.size(); ++k)
        if (k != p.i()) out.push_back(l[k]);
      for (std::size_t k = 0; k < r.size(); ++k)
        if (k != p.j()) out.push_back(r[k]);
      std::vector<std::size_t> joined = l[p.i()];
      joined.insert(joined.end(), r[p.j()].begin(), r[p.j()].end());
      out.push_back(std::move(joined));
      return out;
    }
  }
  return {};
}

}  // namespace detail

inline ComplexMatrix mllAxiomLinkMatrix(const Proof& p) {
  if (!p.valid()) throw PreconditionError("mll-matrix: proof is not well formed");
  std::vector<std::pair<std::size_t, std::size_t>> links;
  auto leaves = detail::atomLeaves(p, links);

  std::vector<std::size_t> order(links.size() * 2);
  std::size_t next = 0;
  for (const auto& formula : leaves)
    for (std::size_t leaf : formula) order[leaf] = next++;

  ComplexMatrix m(next, next);
  for (auto [a, b] : links) {
    m(order[a], order[b]) = 1.0;
    m(order[b], order[a]) = 1.0;
  }
  return m;
}

}  // namespace qmll
