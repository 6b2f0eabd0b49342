#pragma once

// Cut elimination: redex detection, the rewrite schemas, the weight that
// bounds every reduction sequence, and normalization under a strategy.
//
// Sequents are ordered, so a rewrite that reshuffles the side formulas is
// followed by an exchange restoring the original conclusion order. Exchanges
// are kept in a canonical position: floated towards the root through cut,
// par and tensor, merged, and dropped when trivial. The only exchanges that
// survive are a root exchange and swaps directly under a q-rule (the swap
// decides which premise formula receives the diamonds and cannot move).
// Every function here takes and returns proofs in that canonical form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qmll/error.hpp"
#include "qmll/matrix.hpp"
#include "qmll/proof.hpp"

namespace qmll {

using Weight = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Exchange canonicalization.

namespace detail {

inline bool isIdentityPermutation(const std::vector<std::size_t>& perm) {
  for (std::size_t k = 0; k < perm.size(); ++k)
    if (perm[k] != k) return false;
  return true;
}

inline Proof withExchange(std::vector<std::size_t> perm, Proof p) {
  if (isIdentityPermutation(perm)) return p;
  return Proof::exchange(std::move(perm), std::move(p));
}

inline Proof rebuild(const Proof& p, std::vector<Proof> premises) {
  switch (p.rule()) {
    case Rule::Axiom:
      return p;
    case Rule::Cut:
      return Proof::cut(p.i(), p.j(), premises[0], premises[1]);
    case Rule::Par:
      return Proof::par(p.i(), p.j(), premises[0]);
    case Rule::Tensor:
      return Proof::tensor(p.i(), p.j(), premises[0], premises[1]);
    case Rule::Quantum:
      return Proof::quantum(p.arity(), p.gate(), premises[0]);
    case Rule::Exchange:
      return Proof::exchange(p.permutation(), premises[0]);
  }
  return p;
}

// Moves exchanges sitting directly on the premises of a cut, par or tensor
// below it: node(.., ex(s, g), ..) becomes ex(s', node'(.., g, ..)).
inline Proof absorbExchanges(const Proof& node) {
  const auto& prem = node.premises();
  bool any = false;
  for (const auto& q : prem) any = any || q.rule() == Rule::Exchange;
  if (!any) return node;

  std::vector<Proof> inner;
  for (const auto& q : prem) inner.push_back(q.rule() == Rule::Exchange ? q.premise(0) : q);
  auto through = [&](std::size_t k, std::size_t pos) {
    return prem[k].rule() == Rule::Exchange ? prem[k].permutation()[pos] : pos;
  };

  Proof moved = [&] {
    switch (node.rule()) {
      case Rule::Cut:
        return Proof::cut(through(0, node.i()), through(1, node.j()), inner[0], inner[1]);
      case Rule::Tensor:
        return Proof::tensor(through(0, node.i()), through(1, node.j()), inner[0], inner[1]);
      case Rule::Par:
        return Proof::par(through(0, node.i()), through(0, node.j()), inner[0]);
      default:
        throw PreconditionError("absorbExchanges: unsupported rule");
    }
  }();

  const std::size_t size = node.conclusion().size();
  std::vector<std::size_t> perm(size);
  for (std::size_t p = 0; p < size; ++p) {
    auto origin = conclusionOrigin(node, p);
    std::optional<PremiseLink> target;
    if (origin) target = PremiseLink{origin->premise, through(origin->premise, origin->position)};
    std::size_t found = size;
    for (std::size_t p2 = 0; p2 < size; ++p2) {
      if (conclusionOrigin(moved, p2) == target) {
        found = p2;
        break;
      }
    }
    if (found == size) throw PreconditionError("absorbExchanges: lost an occurrence");
    perm[p] = found;
  }
  return withExchange(std::move(perm), std::move(moved));
}

}  // namespace detail

inline Proof canonicalize(const Proof& p) {
  if (p.rule() == Rule::Axiom) return p;
  std::vector<Proof> prem;
  bool changed = false;
  for (const auto& q : p.premises()) {
    prem.push_back(canonicalize(q));
    changed = changed || !sameNode(prem.back(), q);
  }
  switch (p.rule()) {
    case Rule::Exchange: {
      std::vector<std::size_t> perm = p.permutation();
      Proof child = prem[0];
      if (child.rule() == Rule::Exchange) {
        for (auto& k : perm) k = child.permutation()[k];
        child = child.premise(0);
      }
      if (detail::isIdentityPermutation(perm)) return child;
      if (child.rule() == Rule::Axiom) return Proof::axiom(child.axiomFormula().dual());
      return Proof::exchange(std::move(perm), std::move(child));
    }
    case Rule::Quantum:
      return changed ? detail::rebuild(p, std::move(prem)) : p;
    default: {
      // An axiom under cut, par or tensor is oriented so that its formula
      // prints before its dual; the parent absorbs the swap.
      for (auto& q : prem) {
        if (q.rule() != Rule::Axiom) continue;
        const Formula& f = q.axiomFormula();
        if (printFormula(f.dual()) < printFormula(f)) {
          q = Proof::exchange({1, 0}, Proof::axiom(f.dual()));
          changed = true;
        }
      }
      Proof node = changed ? detail::rebuild(p, std::move(prem)) : p;
      return detail::absorbExchanges(node);
    }
  }
}

// ---------------------------------------------------------------------------
// Redexes.

enum class RedexKind : std::uint8_t {
  AxiomRed,
  MultPrincipal,
  QuantumPrincipal,
  EtaExpand,
  QContract,
  CommutePar,
  CommuteTensorLeft,
  CommuteTensorRight,
};

inline const char* redexName(RedexKind k) {
  switch (k) {
    case RedexKind::AxiomRed:
      return "axiom";
    case RedexKind::MultPrincipal:
      return "mult-principal";
    case RedexKind::QuantumPrincipal:
      return "quantum-principal";
    case RedexKind::EtaExpand:
      return "eta-expand";
    case RedexKind::QContract:
      return "quantum-contract";
    case RedexKind::CommutePar:
      return "commute-par";
    case RedexKind::CommuteTensorLeft:
      return "commute-tensor-left";
    case RedexKind::CommuteTensorRight:
      return "commute-tensor-right";
  }
  return "?";
}

struct Redex {
  RedexKind kind;
  NodePath site;
  // For AxiomRed: the cut premise that is the axiom. For commuting
  // reductions: the cut premise whose last rule is lifted. Otherwise 0.
  int side = 0;

  std::string str() const {
    std::string s = redexName(kind);
    s += " at " + printPath(site);
    if (kind == RedexKind::AxiomRed || kind == RedexKind::CommutePar ||
        kind == RedexKind::CommuteTensorLeft || kind == RedexKind::CommuteTensorRight)
      s += side == 0 ? " (left)" : " (right)";
    return s;
  }
  friend bool operator==(const Redex&, const Redex&) = default;
};

namespace detail {

inline bool lastIsPrincipal(const Proof& p, std::size_t pos) {
  switch (p.rule()) {
    case Rule::Axiom:
    case Rule::Quantum:
      return true;
    case Rule::Par:
    case Rule::Tensor:
      return pos + 1 == p.conclusion().size();
    default:
      return false;
  }
}

inline bool isMultiplicative(const Proof& p) {
  return p.rule() == Rule::Par || p.rule() == Rule::Tensor;
}

inline std::optional<RedexKind> commuteKind(const Proof& premise, std::size_t pos) {
  if (!isMultiplicative(premise) || lastIsPrincipal(premise, pos)) return std::nullopt;
  if (premise.rule() == Rule::Par) return RedexKind::CommutePar;
  return conclusionOrigin(premise, pos)->premise == 0 ? RedexKind::CommuteTensorLeft
                                                       : RedexKind::CommuteTensorRight;
}

// Redexes whose site is exactly `p`.
inline bool cutBelow(const Proof& root, const NodePath& site) {
  for (std::size_t d = 0; d < site.size(); ++d)
    if (subproofAt(root, NodePath(site.begin(), site.begin() + d)).rule() == Rule::Cut) return true;
  return false;
}

// Eta expansion is offered where it cannot race an axiom reduction: at an
// axiom with no cut below it, or where the q-rule right above a cut needs
// more modalities to match the arity of the q-rule it is cut against.
inline bool etaAllowed(const Proof& root, const NodePath& site) {
  if (!cutBelow(root, site)) return true;
  if (site.size() < 2) return false;
  const Proof& parent = subproofAt(root, NodePath(site.begin(), site.end() - 1));
  const Proof& below = subproofAt(root, NodePath(site.begin(), site.end() - 2));
  if (parent.rule() != Rule::Quantum || below.rule() != Rule::Cut) return false;
  const Proof& partner = below.premise(1 - site[site.size() - 2]);
  return partner.rule() == Rule::Quantum && partner.arity() > parent.arity();
}

// Contraction follows the same discipline as eta expansion. With no cut
// below, any pair contracts. Otherwise only the base of a tower standing on
// a cut against a larger q-rule contracts, which is what the arity match
// needs; contracting elsewhere can race a match that appears later.
inline bool contractAllowed(const Proof& root, const NodePath& site) {
  if (!cutBelow(root, site)) return true;
  if (site.empty()) return false;
  const Proof& below = subproofAt(root, NodePath(site.begin(), site.end() - 1));
  if (below.rule() != Rule::Cut) return false;
  const Proof& partner = below.premise(1 - site.back());
  return partner.rule() == Rule::Quantum && partner.arity() > below.premise(site.back()).arity();
}

inline void localRedexes(const Proof& root, const Proof& p, const NodePath& site, std::vector<Redex>& out) {
  switch (p.rule()) {
    case Rule::Axiom:
      if (p.axiomFormula().modalRun() > 0 && etaAllowed(root, site))
        out.push_back({RedexKind::EtaExpand, site, 0});
      return;
    case Rule::Quantum:
      if (p.premise(0).rule() == Rule::Quantum && contractAllowed(root, site))
        out.push_back({RedexKind::QContract, site, 0});
      return;
    case Rule::Cut: {
      const Proof& l = p.premise(0);
      const Proof& r = p.premise(1);
      if (l.rule() == Rule::Axiom) out.push_back({RedexKind::AxiomRed, site, 0});
      if (r.rule() == Rule::Axiom) out.push_back({RedexKind::AxiomRed, site, 1});
      if (isMultiplicative(l) && isMultiplicative(r) && lastIsPrincipal(l, p.i()) &&
          lastIsPrincipal(r, p.j()))
        out.push_back({RedexKind::MultPrincipal, site, 0});
      if (l.rule() == Rule::Quantum && r.rule() == Rule::Quantum && l.arity() == r.arity())
        out.push_back({RedexKind::QuantumPrincipal, site, 0});
      // Commuting: the right premise first; the left premise only when the
      // right one can neither commute nor still change its last rule.
      if (auto k = commuteKind(r, p.j())) {
        out.push_back({*k, site, 1});
      } else if (r.rule() != Rule::Cut) {
        if (auto k2 = commuteKind(l, p.i())) out.push_back({*k2, site, 0});
      }
      return;
    }
    default:
      return;
  }
}

inline void collectRedexes(const Proof& root, const Proof& p, NodePath& path, std::vector<Redex>& out) {
  for (std::size_t k = 0; k < p.premises().size(); ++k) {
    path.push_back(static_cast<int>(k));
    collectRedexes(root, p.premise(k), path, out);
    path.pop_back();
  }
  localRedexes(root, p, path, out);
}

}  // namespace detail

// Every redex of p, in post-order (innermost first, then left to right).
inline std::vector<Redex> findRedexes(const Proof& p) {
  std::vector<Redex> out;
  NodePath path;
  detail::collectRedexes(p, p, path, out);
  return out;
}

// ---------------------------------------------------------------------------
// Reducts.

namespace detail {

using Label = std::pair<int, std::size_t>;
inline constexpr Label kNewPrincipal{-1, 0};

// Labels each conclusion occurrence by the frozen subproof occurrence it
// comes from; the single freshly built par/tensor principal gets kNewPrincipal.
inline std::vector<Label> labelsOf(const Proof& p, const std::vector<Proof>& frozen) {
  for (std::size_t k = 0; k < frozen.size(); ++k) {
    if (sameNode(p, frozen[k])) {
      std::vector<Label> out;
      for (std::size_t pos = 0; pos < p.conclusion().size(); ++pos)
        out.emplace_back(static_cast<int>(k), pos);
      return out;
    }
  }
  std::vector<std::vector<Label>> prem;
  for (const auto& q : p.premises()) prem.push_back(labelsOf(q, frozen));
  std::vector<Label> out;
  switch (p.rule()) {
    case Rule::Axiom:
      throw PreconditionError("labelsOf: unexpected axiom outside the frozen set");
    case Rule::Quantum:
      return prem[0];
    case Rule::Exchange:
      for (std::size_t k : p.permutation()) out.push_back(prem[0][k]);
      return out;
    case Rule::Par:
      for (std::size_t k = 0; k < prem[0].size(); ++k)
        if (k != p.i() && k != p.j()) out.push_back(prem[0][k]);
      out.push_back(kNewPrincipal);
      return out;
    case Rule::Cut:
    case Rule::Tensor:
      for (std::size_t k = 0; k < prem[0].size(); ++k)
        if (k != p.i()) out.push_back(prem[0][k]);
      for (std::size_t k = 0; k < prem[1].size(); ++k)
        if (k != p.j()) out.push_back(prem[1][k]);
      if (p.rule() == Rule::Tensor) out.push_back(kNewPrincipal);
      return out;
  }
  return out;
}

// Wraps `reduct` in the exchange that restores the conclusion order of
// `original`; both are built over the same frozen subproofs.
inline Proof restoreOrder(const Proof& original, const Proof& reduct,
                          const std::vector<Proof>& frozen) {
  auto want = labelsOf(original, frozen);
  auto have = labelsOf(reduct, frozen);
  if (want.size() != have.size()) throw PreconditionError("reduct changed the sequent size");
  std::vector<std::size_t> perm(want.size());
  for (std::size_t p = 0; p < want.size(); ++p) {
    auto it = std::find(have.begin(), have.end(), want[p]);
    if (it == have.end()) throw PreconditionError("reduct lost an occurrence");
    perm[p] = static_cast<std::size_t>(it - have.begin());
  }
  return withExchange(std::move(perm), reduct);
}

inline std::size_t skip(std::size_t q, std::size_t removed) { return q < removed ? q : q + 1; }
inline std::size_t squeeze(std::size_t q, std::size_t removed) { return q < removed ? q : q - 1; }

inline Gate productGate(UnitaryMatrix u) {
  auto name = gates::nameOf(u, 0.0);
  return Gate{std::move(u), name ? *name : std::string()};
}

inline Proof reduceAxiom(const Proof& cut, int side) {
  const Proof& l = cut.premise(0);
  const Proof& r = cut.premise(1);
  std::vector<std::size_t> perm;
  if (side == 1) {
    // |- L\i, A  from L = |- .., A(i), ..
    const std::size_t n = l.conclusion().size();
    for (std::size_t p = 0; p + 1 < n; ++p) perm.push_back(skip(p, cut.i()));
    perm.push_back(cut.i());
    return withExchange(std::move(perm), l);
  }
  const std::size_t n = r.conclusion().size();
  perm.push_back(cut.j());
  for (std::size_t p = 0; p + 1 < n; ++p) perm.push_back(skip(p, cut.j()));
  return withExchange(std::move(perm), r);
}

inline Proof reduceEta(const Proof& ax) {
  const Formula& f = ax.axiomFormula();
  const std::size_t n = f.modalRun();
  const Formula g = f.stripModal(n);
  Gate id = Gate::named(gates::identityName(n));
  if (f.kind() == Formula::Kind::Box) return Proof::quantum(n, id, Proof::axiom(g));
  return Proof::exchange({1, 0}, Proof::quantum(n, id, Proof::axiom(g.dual())));
}

inline Proof reduceContract(const Proof& outer) {
  const Proof& inner = outer.premise(0);
  UnitaryMatrix u = tensor(inner.gate().unitary, outer.gate().unitary);
  return Proof::quantum(inner.arity() + outer.arity(), productGate(std::move(u)), inner.premise(0));
}

inline Proof reduceQuantumPrincipal(const Proof& cut) {
  const Proof& l = cut.premise(0);
  const Proof& r = cut.premise(1);
  const Proof& xi = l.premise(0);
  const Proof& mu = r.premise(0);
  const std::size_t m = l.arity();
  // The q-rule whose diamond formula survives acts first on the path from
  // the diamond side to the box side of the result.
  if (cut.i() == 1) {
    UnitaryMatrix w = matmul(r.gate().unitary, l.gate().unitary);
    return Proof::quantum(m, productGate(std::move(w)), Proof::cut(1, 0, xi, mu));
  }
  UnitaryMatrix w = matmul(l.gate().unitary, r.gate().unitary);
  return Proof::exchange({1, 0},
                         Proof::quantum(m, productGate(std::move(w)), Proof::cut(1, 0, mu, xi)));
}

inline Proof reduceMultPrincipal(const Proof& cut) {
  const Proof& l = cut.premise(0);
  const Proof& r = cut.premise(1);
  const bool tensorLeft = l.rule() == Rule::Tensor;
  const Proof& t = tensorLeft ? l : r;
  const Proof& s = tensorLeft ? r : l;
  const Proof& pa = t.premise(0);  // |- Gamma, A
  const Proof& qb = t.premise(1);  // |- Delta, B
  const Proof& sp = s.premise(0);  // |- Theta, ~A, ~B
  const std::size_t a = t.i(), b = t.j(), c = s.i(), d = s.j();
  Proof reduct = [&] {
    if (tensorLeft) {
      Proof inner = Proof::cut(b, d, qb, sp);
      const std::size_t posA = (qb.conclusion().size() - 1) + squeeze(c, d);
      return Proof::cut(a, posA, pa, inner);
    }
    Proof inner = Proof::cut(d, b, sp, qb);
    return Proof::cut(squeeze(c, d), a, inner, pa);
  }();
  return restoreOrder(cut, reduct, {pa, qb, sp});
}

inline Proof reduceCommute(const Proof& cut, RedexKind kind, int side) {
  const Proof& l = cut.premise(0);
  const Proof& r = cut.premise(1);
  const Proof& lifted = side == 1 ? r : l;
  const Proof& other = side == 1 ? l : r;
  const std::size_t pos = side == 1 ? cut.j() : cut.i();
  const PremiseLink origin = *conclusionOrigin(lifted, pos);
  const std::size_t a = lifted.i(), b = lifted.j();

  // Cut `other` against premise `k` of the lifted rule, keeping the cut's
  // left/right roles; returns the cut and the offset of the lifted premise's
  // surviving formulas inside its conclusion.
  auto innerCut = [&](const Proof& q) -> std::pair<Proof, std::size_t> {
    if (side == 1) return {Proof::cut(cut.i(), origin.position, other, q), other.conclusion().size() - 1};
    return {Proof::cut(origin.position, cut.j(), q, other), 0};
  };
  auto moved = [&](std::size_t x, std::size_t offset) {
    return offset + squeeze(x, origin.position);
  };

  Proof reduct = [&] {
    if (kind == RedexKind::CommutePar) {
      auto [inner, off] = innerCut(lifted.premise(0));
      return Proof::par(moved(a, off), moved(b, off), inner);
    }
    if (kind == RedexKind::CommuteTensorLeft) {
      auto [inner, off] = innerCut(lifted.premise(0));
      return Proof::tensor(moved(a, off), b, inner, lifted.premise(1));
    }
    auto [inner, off] = innerCut(lifted.premise(1));
    return Proof::tensor(a, moved(b, off), lifted.premise(0), inner);
  }();

  std::vector<Proof> frozen{other};
  for (const auto& q : lifted.premises()) frozen.push_back(q);
  return restoreOrder(cut, reduct, frozen);
}

inline Proof replaceAt(const Proof& p, const NodePath& path, std::size_t depth, const Proof& sub) {
  if (depth == path.size()) return sub;
  std::vector<Proof> prem = p.premises();
  auto k = static_cast<std::size_t>(path[depth]);
  prem[k] = replaceAt(prem[k], path, depth + 1, sub);
  return rebuild(p, std::move(prem));
}

}  // namespace detail

// Fires r on p. Throws PreconditionError when r is not a redex of p.
inline Proof step(const Proof& p, const Redex& r) {
  const Proof& site = subproofAt(p, r.site);
  std::vector<Redex> here;
  detail::localRedexes(p, site, r.site, here);
  if (std::find(here.begin(), here.end(), r) == here.end())
    throw PreconditionError("stale redex: " + r.str());

  Proof reduct = [&] {
    switch (r.kind) {
      case RedexKind::AxiomRed:
        return detail::reduceAxiom(site, r.side);
      case RedexKind::EtaExpand:
        return detail::reduceEta(site);
      case RedexKind::QContract:
        return detail::reduceContract(site);
      case RedexKind::QuantumPrincipal:
        return detail::reduceQuantumPrincipal(site);
      case RedexKind::MultPrincipal:
        return detail::reduceMultPrincipal(site);
      default:
        return detail::reduceCommute(site, r.kind, r.side);
    }
  }();
  if (reduct.conclusion() != site.conclusion())
    throw PreconditionError("internal: reduct changed the conclusion of " + r.str());
  return canonicalize(detail::replaceAt(p, r.site, 0, reduct));
}

// ---------------------------------------------------------------------------
// Weight: a sum over rule instances, each scaled by 2^|A| for every cut on
// formula A below it. Axioms on A weigh 1 + 3 * (leading modalities of A),
// q-rules 2, par and tensor 1, exchanges 0. Every reduction step lowers it.

inline Weight weight(const Proof& p) {
  switch (p.rule()) {
    case Rule::Axiom:
      return Weight(1 + 3 * p.axiomFormula().modalPrefix());
    case Rule::Exchange:
      return weight(p.premise(0));
    case Rule::Par:
      return weight(p.premise(0)) + 1;
    case Rule::Quantum:
      return weight(p.premise(0)) + 2;
    case Rule::Tensor:
      return weight(p.premise(0)) + weight(p.premise(1)) + 1;
    case Rule::Cut: {
      Weight scale = Weight(1) << static_cast<unsigned>(p.premise(0).conclusion()[p.i()].size());
      return scale * (weight(p.premise(0)) + weight(p.premise(1)));
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Normalization.

struct Strategy {
  enum class Kind : std::uint8_t { LeftmostInnermost, Random };
  Kind kind = Kind::LeftmostInnermost;
  std::uint64_t seed = 0;

  static Strategy leftmostInnermost() { return {}; }
  static Strategy random(std::uint64_t seed) { return {Kind::Random, seed}; }
};

struct TraceStep {
  Redex redex;
  std::size_t sizeBefore;
  Weight weightBefore;
  Weight weightAfter;
};

struct ReductionTrace {
  std::vector<TraceStep> steps;
  Proof final;
};

inline bool isCutFree(const Proof& p) {
  if (p.rule() == Rule::Cut) return false;
  for (const auto& q : p.premises())
    if (!isCutFree(q)) return false;
  return true;
}

// 2^(rules + axiom modalities), saturating at 2^40: every eta expansion of
// a modal axiom adds rules, so the rule count alone does not bound short
// proofs built from heavily modal axioms.
inline std::uint64_t stepBound(const Proof& p) {
  std::size_t modal = 0;
  auto visit = [&](auto&& self, const Proof& q) -> void {
    if (q.rule() == Rule::Axiom) modal += q.axiomFormula().modalPrefix();
    for (const auto& c : q.premises()) self(self, c);
  };
  visit(visit, p);
  const std::size_t e = std::min<std::size_t>(40, p.ruleCount() + modal);
  return std::uint64_t{1} << e;
}

// `onStep` (optional) observes (before, redex, after) for every step.
template <class OnStep>
ReductionTrace normalize(const Proof& input, Strategy strategy, OnStep&& onStep) {
  if (!input.valid()) throw PreconditionError("normalize: proof does not check");
  ReductionTrace trace{{}, canonicalize(input)};
  std::mt19937_64 rng(strategy.seed);
  const std::uint64_t bound = stepBound(input);
  Weight w = weight(trace.final);
  for (;;) {
    auto redexes = findRedexes(trace.final);
    if (redexes.empty()) break;
    if (trace.steps.size() >= bound)
      throw BoundExceeded("normalize: step bound " + std::to_string(bound) + " exceeded");
    std::size_t pick = 0;
    if (strategy.kind == Strategy::Kind::Random)
      pick = std::uniform_int_distribution<std::size_t>(0, redexes.size() - 1)(rng);
    Proof next = step(trace.final, redexes[pick]);
    Weight w2 = weight(next);
    onStep(trace.final, redexes[pick], next);
    trace.steps.push_back({redexes[pick], trace.final.ruleCount(), w, w2});
    trace.final = std::move(next);
    w = std::move(w2);
  }
  return trace;
}

inline ReductionTrace normalize(const Proof& input, Strategy strategy = {}) {
  return normalize(input, strategy, [](const Proof&, const Redex&, const Proof&) {});
}

// ---------------------------------------------------------------------------
// Confluence instrumentation.

// Printed form with gate entries rounded to 1e-9, for approximate
// comparison of proofs whose gates were composed in different orders.
inline std::string proofKey(const Proof& p) {
  std::string out = "(";
  out += ruleName(p.rule());
  switch (p.rule()) {
    case Rule::Axiom:
      out += " " + printFormula(p.axiomFormula());
      break;
    case Rule::Cut:
    case Rule::Par:
    case Rule::Tensor:
      out += " " + std::to_string(p.i()) + " " + std::to_string(p.j());
      break;
    case Rule::Quantum:
      out += " " + std::to_string(p.arity());
      for (const auto& z : p.gate().unitary.matrix().entries())
        out += " " + std::to_string(std::llround(z.real() * 1e9)) + "," +
               std::to_string(std::llround(z.imag() * 1e9));
      break;
    case Rule::Exchange:
      for (auto k : p.permutation()) out += " " + std::to_string(k);
      break;
  }
  for (const auto& q : p.premises()) out += " " + proofKey(q);
  return out + ")";
}

// All proofs reachable from p in at most `depth` steps, keyed by proofKey.
inline std::map<std::string, Proof> reachableWithin(const Proof& p, std::size_t depth) {
  std::map<std::string, Proof> seen{{proofKey(p), p}};
  std::vector<Proof> frontier{p};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<Proof> next;
    for (const auto& q : frontier)
      for (const auto& r : findRedexes(q)) {
        Proof s = step(q, r);
        if (seen.emplace(proofKey(s), s).second) next.push_back(s);
      }
    frontier = std::move(next);
  }
  return seen;
}

// True when the reducts a and b have a common reduct within `depth` steps each.
inline bool joinableWithin(const Proof& a, const Proof& b, std::size_t depth) {
  auto ra = reachableWithin(a, depth);
  auto rb = reachableWithin(b, depth);
  for (const auto& [key, proof] : ra)
    if (rb.count(key)) return true;
  return false;
}

}  // namespace qmll
