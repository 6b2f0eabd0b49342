// Acceptance gate: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qmll/circuit.hpp"
#include "qmll/cut_elim.hpp"
#include "qmll/json_io.hpp"
#include "qmll/mll_matrix.hpp"
#include "qmll/qiam.hpp"
#include "support/proof_generator.hpp"

using namespace qmll;

namespace {

const std::size_t kCorpusSize = 1000;
const std::size_t kRandomStrategies = 20;

struct Verdict {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trimmed(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

std::string sample(const std::string& rel) { return std::string(QMLL_SAMPLES_DIR) + "/" + rel; }

const std::vector<Proof>& corpus() {
  static const std::vector<Proof> c = testing_support::corpus(kCorpusSize);
  return c;
}

std::vector<Token> initialTokens(const OccurrenceGraph& g) {
  std::vector<Token> out;
  const auto& c = g.proof().conclusion();
  for (std::size_t pos = 0; pos < c.size(); ++pos)
    for (const auto& e : contextsFor(c[pos]))
      if (e.polarity == Polarity::Negative) out.push_back(Token{0, pos, e.context, Stack()});
  return out;
}

StateVector randomState(std::mt19937_64& rng, std::size_t qubits) {
  return applyAt(testing_support::randomUnitary(rng, qubits), StateVector::basis(qubits, 0), 0);
}

StateVector apply(const ComplexMatrix& m, const StateVector& v) {
  std::vector<Complex> out(v.dim());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r] += m(r, c) * v[c];
  return StateVector(v.qubits(), std::move(out));
}

ComplexMatrix integerMatrix(std::initializer_list<std::initializer_list<int>> rows) {
  ComplexMatrix m(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (int v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

Verdict mllMatrices() {
  Verdict v;
  const ComplexMatrix m = integerMatrix({{0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}});
  const ComplexMatrix n = integerMatrix({{0, 0, 0, 1}, {0, 0, 1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}});
  if (mllAxiomLinkMatrix(parseProof(slurp(sample("proofs/pi.proof")))) != m) v.fail("pi does not give M");
  if (mllAxiomLinkMatrix(parseProof(slurp(sample("proofs/rho.proof")))) != n) v.fail("rho does not give N");
  return v;
}

Verdict goldenEncodings() {
  Verdict v;
  for (const char* name : {"identity3", "h_on_2", "h_cnot", "h_z_x_cnot"}) {
    Proof p = encode(parseCircuit(slurp(sample(std::string("circuits/") + name + ".json"))));
    if (printProof(p) != trimmed(slurp(sample(std::string("proofs/") + name + ".proof"))))
      v.fail(std::string(name) + ": encoding differs from golden");
    if (!check(p).ok) v.fail(std::string(name) + ": does not check");
  }
  return v;
}

Verdict fourGateEndToEnd() {
  Verdict v;
  Circuit c = parseCircuit(slurp(sample("circuits/h_z_x_cnot.json")));
  SemanticsResult r = semanticsRelative(encode(c), 0, parseContext("<><>[.]"));
  // Oracle column by column through the state-vector simulator.
  ComplexMatrix oracle(4, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    StateVector col = simulate(c, StateVector::basis(2, k));
    for (std::size_t j = 0; j < 4; ++j) oracle(j, k) = col[j];
  }
  const double err = maxAbsDifference(r.unitary.matrix(), oracle);
  if (err > 1e-8) v.fail("max entry error " + std::to_string(err));
  return v;
}

Verdict normalFormsAreCutFree() {
  Verdict v;
  for (const auto& p : corpus()) {
    std::optional<ReductionTrace> run;
    try {
      run = normalize(p);
    } catch (const BoundExceeded& e) {
      v.fail(std::string(e.what()) + " on " + printProof(p));
      continue;
    }
    const ReductionTrace& t = *run;
    if (!isCutFree(t.final)) v.fail("cut left in " + printProof(t.final));
    for (const auto& r : findRedexes(t.final))
      v.fail(std::string("redex ") + r.str() + " left in " + printProof(t.final));
    if (t.final.conclusion() != p.conclusion()) v.fail("conclusion changed for " + printProof(p));
  }
  return v;
}

Verdict confluence() {
  Verdict v;
  std::size_t pairs = 0;
  for (const auto& p : corpus()) {
    Proof base = normalize(p).final;
    for (std::uint64_t seed = 1; seed <= kRandomStrategies; ++seed)
      if (!approxSameProof(base, normalize(p, Strategy::random(seed)).final))
        v.fail("seed " + std::to_string(seed) + " diverges on " + printProof(p));
    Proof c = canonicalize(p);
    auto rs = findRedexes(c);
    for (std::size_t a = 0; a < rs.size(); ++a)
      for (std::size_t b = a + 1; b < rs.size(); ++b) {
        ++pairs;
        if (!joinableWithin(step(c, rs[a]), step(c, rs[b]), 2))
          v.fail(rs[a].str() + " / " + rs[b].str() + " do not rejoin on " + printProof(c));
      }
  }
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(pairs) + " divergent pairs";
  return v;
}

Verdict weightDecreases() {
  Verdict v;
  std::size_t steps = 0, violations = 0;
  for (const auto& p : corpus())
    for (const auto& s : normalize(p).steps) {
      ++steps;
      if (!(s.weightAfter < s.weightBefore)) ++violations;
    }
  if (violations > 0) v.fail(std::to_string(violations) + " violations");
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(steps) + " steps";
  return v;
}

Verdict semanticInvariance() {
  Verdict v;
  std::size_t compared = 0;
  for (const auto& p : corpus()) {
    if (!testing_support::hasModalPair(p)) continue;
    auto entries = initialTokens(OccurrenceGraph(p));
    normalize(p, Strategy::leftmostInnermost(), [&](const Proof& before, const Redex& r, const Proof& after) {
      for (const auto& t0 : entries) {
        auto a = semanticsRelative(before, t0.position, t0.context);
        auto b = semanticsRelative(after, t0.position, t0.context);
        ++compared;
        if (a.exitPosition != b.exitPosition || maxAbsDifference(a.unitary.matrix(), b.unitary.matrix()) > 1e-8)
          v.fail(r.str() + " changes semantics of " + printProof(before));
      }
    });
  }
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(compared) + " comparisons";
  return v;
}

Verdict unitarity() {
  Verdict v;
  std::size_t checked = 0;
  for (const auto& p : corpus()) {
    OccurrenceGraph g(p);
    for (const Token& t0 : initialTokens(g)) {
      if (t0.context.depth() == 0) continue;
      ++checked;
      SemanticsResult s = semanticsRelative(g, t0.position, t0.context);
      if (unitarityDefect(s.unitary.matrix()) > 1e-8) v.fail("not unitary: " + printProof(p));
      Circuit c = extract(p, t0.position, t0.context);
      for (std::size_t k = 0; k < s.unitary.dim(); ++k) {
        StateVector col = simulate(c, StateVector::basis(c.qubits, k));
        for (std::size_t j = 0; j < s.unitary.dim(); ++j)
          if (std::abs(col[j] - s.unitary.matrix()(j, k)) > 1e-8) {
            v.fail("extracted circuit differs on " + printProof(p));
            j = k = s.unitary.dim();
          }
      }
    }
  }
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(checked) + " entries";
  return v;
}

Verdict totality() {
  Verdict v;
  std::mt19937_64 rng(9);
  std::size_t runs = 0;
  for (const auto& p : corpus()) {
    OccurrenceGraph g(p);
    const std::size_t bound = g.legalStateCount();
    for (const Token& t0 : initialTokens(g)) {
      ++runs;
      MachineState s{t0, randomState(rng, t0.context.depth())};
      const double norm0 = s.reg.norm();
      for (std::size_t k = 0;; ++k) {
        if (k > bound) {
          v.fail("no final state within " + std::to_string(bound) + " steps: " + printProof(p));
          break;
        }
        MachineStep st = stepMachine(g, s);
        if (st.outcome == TokenStep::Outcome::Stuck) {
          v.fail("stuck: " + printProof(p));
          break;
        }
        if (st.outcome == TokenStep::Outcome::Final) break;
        s = std::move(st.state);
        if (std::abs(s.reg.norm() - norm0) > 1e-8) {
          v.fail("norm drift on " + printProof(p));
          break;
        }
      }
    }
  }
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(runs) + " runs";
  return v;
}

std::string symbolicTrace(const OccurrenceGraph& g, const Token& t0) {
  std::string out;
  runToken(g, t0, [&](std::size_t, const Token& t, const GateEvent* e) {
    out += occurrenceOf(g, t).str() + " " + printContext(t.context) + " " + t.stack.str();
    if (e != nullptr) out += " !" + std::to_string(e->offset) + (e->adjoint ? "*" : "");
    out += "\n";
  });
  return out;
}

Verdict uniformity() {
  Verdict v;
  std::mt19937_64 rng(10);
  std::size_t proofs = 0;
  for (const auto& p : corpus()) {
    if (proofs == 100) break;
    OccurrenceGraph g(p);
    auto tokens = initialTokens(g);
    if (tokens.empty()) continue;
    ++proofs;
    for (const Token& t0 : tokens) {
      SemanticsResult sem = semanticsRelative(g, t0.position, t0.context);
      std::string reference;
      for (int k = 0; k < 5; ++k) {
        StateVector in = randomState(rng, t0.context.depth());
        std::string trace;
        MachineRun r = run(g, MachineState{t0, in}, [&](std::size_t, const Token& t, const GateEvent* e) {
          trace += occurrenceOf(g, t).str() + " " + printContext(t.context) + " " + t.stack.str();
          if (e != nullptr) trace += " !" + std::to_string(e->offset) + (e->adjoint ? "*" : "");
          trace += "\n";
        });
        if (k == 0) reference = trace;
        if (trace != reference) v.fail("trace depends on the register: " + printProof(p));
        if (maxAbsDifference(r.final.reg, apply(sem.unitary.matrix(), in)) > 1e-8)
          v.fail("register not related by the composed unitary: " + printProof(p));
      }
      if (reference != symbolicTrace(g, t0)) v.fail("machine trace differs from token trace: " + printProof(p));
    }
  }
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(proofs) + " proofs";
  return v;
}

struct Criterion {
  int id;
  const char* name;
  double budgetSeconds;
  std::function<Verdict()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "mll-matrix of pi and rho", 1, mllMatrices},
      {2, "golden encodings", 1, goldenEncodings},
      {3, "H, Z, X, CNOT semantics vs simulation", 1, fourGateEndToEnd},
      {4, "normal forms are cut-free", 60, normalFormsAreCutFree},
      {5, "confluence", 120, confluence},
      {6, "weight strictly decreases", 0, weightDecreases},
      {7, "semantic invariance under reduction", 0, semanticInvariance},
      {8, "unitarity and circuit extraction", 0, unitarity},
      {9, "machine totality and norm", 0, totality},
      {10, "uniformity", 0, uniformity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budgetSeconds > 0 && seconds > c.budgetSeconds)
      v.fail("took " + std::to_string(seconds) + " s, budget " + std::to_string(c.budgetSeconds) + " s");
    if (!v.ok) ++failures;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", seconds);
    std::cout << (v.ok ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << " (" << timing << ")"
              << (v.detail.empty() ? "" : ": " + v.detail) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
