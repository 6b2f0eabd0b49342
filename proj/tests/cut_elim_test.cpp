#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "qmll/cut_elim.hpp"
#include "qmll/mll_matrix.hpp"
#include "support/proof_generator.hpp"

using namespace qmll;

namespace {

bool hasKind(const std::vector<Redex>& rs, RedexKind k, int side = -1) {
  return std::any_of(rs.begin(), rs.end(),
                     [&](const Redex& r) { return r.kind == k && (side < 0 || r.side == side); });
}

Redex only(const Proof& p, RedexKind k) {
  for (const auto& r : findRedexes(p))
    if (r.kind == k) return r;
  ADD_FAILURE() << "no " << redexName(k) << " redex in " << printProof(p);
  return {};
}

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

TEST(Canonicalize, MergesAndDropsExchanges) {
  EXPECT_EQ(printProof(canonicalize(parseProof("(ex (2 1) (ex (2 1) (q 1 H (ax a))))"))), "(q 1 H (ax a))");
  EXPECT_EQ(printProof(canonicalize(parseProof("(ex (2 1) (ax a))"))), "(ax ~a)");
  EXPECT_EQ(printProof(canonicalize(parseProof("(ex (2 1) (q 1 H (ax a)))"))), "(ex (2 1) (q 1 H (ax a)))");
}

TEST(Canonicalize, FloatsExchangesThroughRules) {
  Proof p = parseProof("(tensor 1 1 (ex (2 1) (q 1 H (ax a))) (ax b))");
  Proof c = canonicalize(p);
  EXPECT_EQ(c.conclusion(), p.conclusion());
  // The tensor picks the other q-rule position, so no exchange survives.
  EXPECT_EQ(printProof(c), "(tensor 2 1 (q 1 H (ax a)) (ax b))");
}

TEST(Canonicalize, KeepsConclusionOnCorpus) {
  for (const auto& p : testing_support::corpus(300, 17)) {
    Proof c = canonicalize(p);
    EXPECT_EQ(c.conclusion(), p.conclusion());
    EXPECT_EQ(c.ruleCount(), p.ruleCount());
  }
}

TEST(Redexes, AxiomCutOffersBothSides) {
  auto rs = findRedexes(parseProof("(cut 2 1 (ax a) (ax a))"));
  EXPECT_TRUE(hasKind(rs, RedexKind::AxiomRed, 0));
  EXPECT_TRUE(hasKind(rs, RedexKind::AxiomRed, 1));
  EXPECT_EQ(rs.size(), 2u);
}

TEST(Redexes, NormalProofHasNone) {
  EXPECT_EQ(findRedexes(parseProof("(q 2 CNOT (q 1 I1 (ax a)))")).size(), 1u);
  EXPECT_TRUE(findRedexes(parseProof("(q 3 I3 (ax a))")).empty());
  EXPECT_TRUE(findRedexes(parseProof("(par 2 1 (par 1 2 (tensor 2 2 (ax a) (ax a))))")).empty());
}

TEST(Redexes, EtaAndContractionWaitForCuts) {
  // Cut-free: both offered.
  auto free = findRedexes(parseProof("(tensor 1 1 (ax []a) (q 1 H (q 1 X (ax b))))"));
  EXPECT_TRUE(hasKind(free, RedexKind::EtaExpand, 0));
  EXPECT_TRUE(hasKind(free, RedexKind::QContract, 0));
  // Under a cut the axiom reduction and the principal step take precedence.
  auto cut = findRedexes(parseProof("(cut 2 1 (q 1 H (ax a)) (ax []a))"));
  EXPECT_FALSE(hasKind(cut, RedexKind::EtaExpand, 0));
  auto tower = findRedexes(parseProof("(cut 2 1 (q 1 X (q 1 H (ax a))) (q 1 Z (ax []a)))"));
  EXPECT_TRUE(hasKind(tower, RedexKind::QuantumPrincipal, 0));
  EXPECT_FALSE(hasKind(tower, RedexKind::QContract, 0));
}

TEST(Redexes, SmallerSideAlignsArity) {
  // q1 against q2: the smaller side contracts, or expands its axiom.
  auto c = findRedexes(parseProof("(cut 2 1 (q 1 X (q 1 H (ax a))) (q 2 CNOT (ax a)))"));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].str(), "quantum-contract at /1");
  auto e = findRedexes(parseProof("(cut 2 1 (q 1 X (ax []a)) (q 2 CNOT (ax a)))"));
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].str(), "eta-expand at /1/1");
  EXPECT_THROW(step(parseProof("(cut 2 1 (q 1 H (ax a)) (ax []a))"), Redex{RedexKind::EtaExpand, {1}, 0}),
               PreconditionError);
}

TEST(Step, AxiomReduction) {
  Proof p = parseProof("(cut 2 1 (q 1 H (ax a)) (ax []a))");
  Proof r = step(p, Redex{RedexKind::AxiomRed, {}, 1});
  EXPECT_EQ(printProof(r), "(q 1 H (ax a))");
  EXPECT_EQ(r.conclusion(), p.conclusion());
}

TEST(Step, AxiomReductionOnTheLeftRestoresOrder) {
  Proof p = parseProof("(cut 1 1 (ax a) (tensor 1 1 (ax a) (ax b)))");
  Proof r = step(p, Redex{RedexKind::AxiomRed, {}, 0});
  EXPECT_EQ(r.conclusion(), p.conclusion());
  EXPECT_EQ(r.ruleCount(), 3u);
}

TEST(Step, EtaExpansionOfBox) {
  EXPECT_EQ(printProof(step(parseProof("(ax [][]a)"), Redex{RedexKind::EtaExpand, {}, 0})),
            "(q 2 I2 (ax a))");
  EXPECT_EQ(printProof(step(parseProof("(ax []<>a)"), Redex{RedexKind::EtaExpand, {}, 0})),
            "(q 1 I1 (ax <>a))");
}

TEST(Step, EtaExpansionOfDiamondKeepsOrder) {
  Proof p = parseProof("(ax <>a)");
  Proof r = step(p, Redex{RedexKind::EtaExpand, {}, 0});
  EXPECT_EQ(printProof(r), "(ex (2 1) (q 1 I1 (ax ~a)))");
  EXPECT_EQ(r.conclusion(), p.conclusion());
}

TEST(Step, QuantumContractionTensorsInnerFirst) {
  Proof r = step(parseProof("(q 1 X (q 1 H (ax a)))"), Redex{RedexKind::QContract, {}, 0});
  EXPECT_EQ(r.arity(), 2u);
  // H (x) X written out by hand.
  const double s = kInvSqrt2;
  ComplexMatrix expected{{0, s, 0, s}, {s, 0, s, 0}, {0, s, 0, -s}, {s, 0, -s, 0}};
  EXPECT_LE(maxAbsDifference(r.gate().unitary.matrix(), expected), 1e-15);
}

TEST(Step, QuantumPrincipalComposesDiamondSideFirst) {
  Proof p = parseProof("(cut 2 1 (q 1 H (ax a)) (q 1 X (ax a)))");
  Proof r = step(p, only(p, RedexKind::QuantumPrincipal));
  ASSERT_EQ(r.rule(), Rule::Quantum);
  EXPECT_EQ(r.conclusion(), p.conclusion());
  // X H = [[1, -1], [1, 1]] / sqrt 2
  const double s = kInvSqrt2;
  EXPECT_LE(maxAbsDifference(r.gate().unitary.matrix(), ComplexMatrix{{s, -s}, {s, s}}), 1e-15);
  EXPECT_EQ(printProof(r.premise(0)), "(cut 2 1 (ax a) (ax a))");
}

TEST(Step, QuantumPrincipalOtherOrientation) {
  // Cut on the diamond of the left premise: the right premise's q-rule now
  // carries the surviving diamond, so it acts first.
  Proof p = parseProof("(cut 1 2 (q 1 H (ax a)) (q 1 X (ax a)))");
  Proof r = step(p, only(p, RedexKind::QuantumPrincipal));
  EXPECT_EQ(r.conclusion(), p.conclusion());
  Proof n = normalize(r).final;
  ASSERT_EQ(n.rule(), Rule::Exchange);
  // H X = [[1, 1], [-1, 1]] / sqrt 2
  const double s = kInvSqrt2;
  EXPECT_LE(maxAbsDifference(n.premise(0).gate().unitary.matrix(), ComplexMatrix{{s, s}, {-s, s}}), 1e-15);
}

TEST(Step, MultiplicativePrincipal) {
  Proof p = parseProof("(cut 3 2 (tensor 2 2 (ax a) (ax b)) (par 1 2 (tensor 2 2 (ax a) (ax b))))");
  Proof r = step(p, only(p, RedexKind::MultPrincipal));
  EXPECT_EQ(r.conclusion(), p.conclusion());
  Proof n = normalize(p).final;
  EXPECT_TRUE(isCutFree(n));
  EXPECT_EQ(mllAxiomLinkMatrix(n), mllAxiomLinkMatrix(parseProof("(tensor 2 2 (ax a) (ax b))")));
}

TEST(Step, CommutingStepLiftsTheTensor) {
  Proof p = parseProof("(cut 1 2 (tensor 2 1 (q 1 H (ax a)) (ax b)) (q 1 X (ax a)))");
  auto rs = findRedexes(p);
  ASSERT_TRUE(hasKind(rs, RedexKind::CommuteTensorLeft, 0));
  Proof r = step(p, only(p, RedexKind::CommuteTensorLeft));
  EXPECT_EQ(r.conclusion(), p.conclusion());
  Proof root = r.rule() == Rule::Exchange ? r.premise(0) : r;
  EXPECT_EQ(root.rule(), Rule::Tensor);
  EXPECT_EQ(root.premise(0).rule(), Rule::Cut);
}

TEST(Step, CommutingPrefersTheRightPremise) {
  Proof p = parseProof(
      "(cut 1 1 (tensor 1 1 (ax a) (ax b)) (tensor 2 1 (ax a) (ax c)))");
  auto rs = findRedexes(p);
  EXPECT_TRUE(hasKind(rs, RedexKind::CommuteTensorLeft, 1));
  EXPECT_FALSE(hasKind(rs, RedexKind::CommuteTensorLeft, 0));
  EXPECT_FALSE(hasKind(rs, RedexKind::CommuteTensorRight, 0));
}

TEST(Step, RejectsStaleRedex) {
  Proof p = parseProof("(q 1 H (ax a))");
  EXPECT_THROW(step(p, Redex{RedexKind::EtaExpand, {0}, 0}), PreconditionError);
  EXPECT_THROW(step(p, Redex{RedexKind::QContract, {}, 0}), PreconditionError);
}

TEST(Weight, AxiomWeights) {
  EXPECT_EQ(weight(parseProof("(ax a)")), 1);
  EXPECT_EQ(weight(parseProof("(ax []<>a)")), 7);
  EXPECT_EQ(weight(parseProof("(q 1 H (ax a))")), 3);
  // cut on []a (size 2): 4 * (3 + 4)
  EXPECT_EQ(weight(parseProof("(cut 2 1 (q 1 H (ax a)) (ax []a))")), 28);
}

TEST(Normalize, FourGateCollapsesToOneGate) {
  Proof p = parseProof("(cut 2 1 (cut 2 1 (q 1 I1 (q 1 H (ax a))) (q 1 X (q 1 Z (ax a)))) (q 2 CNOT (ax a)))");
  Proof n = normalize(p).final;
  ASSERT_EQ(n.rule(), Rule::Quantum);
  EXPECT_EQ(n.arity(), 2u);
  EXPECT_EQ(n.premise(0).rule(), Rule::Axiom);
  // CNOT (Z (x) X) (H (x) I), multiplied out by hand.
  const double s = kInvSqrt2;
  ComplexMatrix expected{{0, s, 0, s}, {s, 0, s, 0}, {-s, 0, s, 0}, {0, -s, 0, s}};
  EXPECT_LE(maxAbsDifference(n.gate().unitary.matrix(), expected), 1e-12);
}

TEST(Normalize, AlreadyNormalTakesNoSteps) {
  auto t = normalize(parseProof("(q 2 CNOT (ax a))"));
  EXPECT_TRUE(t.steps.empty());
}

TEST(Normalize, RejectsInvalidProof) {
  EXPECT_THROW(normalize(parseProofUnchecked("(q 2 H (ax a))")), PreconditionError);
}

TEST(Normalize, CorpusNormalFormsAreCutFreeAndWeightDecreases) {
  for (const auto& p : testing_support::corpus(300, 23)) {
    auto t = normalize(p);
    EXPECT_TRUE(isCutFree(t.final)) << printProof(p);
    EXPECT_TRUE(findRedexes(t.final).empty());
    EXPECT_EQ(t.final.conclusion(), p.conclusion());
    for (const auto& s : t.steps) EXPECT_LT(s.weightAfter, s.weightBefore) << printProof(p);
  }
}

TEST(Normalize, StrategiesAgree) {
  for (const auto& p : testing_support::corpus(150, 31)) {
    Proof base = normalize(p).final;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
      EXPECT_TRUE(approxSameProof(base, normalize(p, Strategy::random(seed)).final)) << printProof(p);
  }
}

TEST(Normalize, LocalConfluenceWithinTwoSteps) {
  std::size_t checked = 0;
  for (const auto& p : testing_support::corpus(150, 37)) {
    Proof c = canonicalize(p);
    auto rs = findRedexes(c);
    for (std::size_t a = 0; a < rs.size(); ++a)
      for (std::size_t b = a + 1; b < rs.size(); ++b) {
        ++checked;
        EXPECT_TRUE(joinableWithin(step(c, rs[a]), step(c, rs[b]), 2))
            << printProof(c) << " / " << rs[a].str() << " / " << rs[b].str();
      }
  }
  EXPECT_GT(checked, 0u);
}
