// qmll: command-line front end.
//
// Exit codes: 0 success, 1 domain error (proof does not check, precondition
// violated), 2 usage or parse error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmll/circuit.hpp"
#include "qmll/cut_elim.hpp"
#include "qmll/error.hpp"
#include "qmll/formula.hpp"
#include "qmll/json_io.hpp"
#include "qmll/mll_matrix.hpp"
#include "qmll/proof.hpp"
#include "qmll/qiam.hpp"

namespace {

using namespace qmll;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string readInput(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t maxQubits() {
  const char* env = std::getenv("QMLL_MAX_QUBITS");
  if (env == nullptr || *env == '\0') return 16;
  char* end = nullptr;
  unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0) throw UsageError("QMLL_MAX_QUBITS must be a positive integer");
  return v;
}

void checkQubits(std::size_t n) {
  if (n > maxQubits())
    throw PreconditionError("register of " + std::to_string(n) + " qubits exceeds QMLL_MAX_QUBITS=" +
                            std::to_string(maxQubits()));
}

// Hole path "k.L.R.M": formula k, then L/R through binary connectives and
// M (or L) through modalities.
std::pair<std::size_t, Context> contextFromPath(const Sequent& s, const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, '.');) parts.push_back(item);
  if (parts.empty()) throw UsageError("empty hole path");
  std::size_t k = 0;
  try {
    k = std::stoul(parts[0]);
  } catch (const std::exception&) {
    throw UsageError("hole path must start with a formula number: " + text);
  }
  if (k == 0 || k > s.size()) throw UsageError("hole path formula " + parts[0] + " out of range");
  const Formula* cur = &s[k - 1];
  std::vector<int> steps;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string& d = parts[i];
    if (cur->isModal() && (d == "M" || d == "L")) {
      steps.push_back(0);
      cur = &cur->body();
    } else if (cur->isBinary() && (d == "L" || d == "R")) {
      steps.push_back(d == "L" ? 0 : 1);
      cur = d == "L" ? &cur->left() : &cur->right();
    } else {
      throw UsageError("hole path step " + d + " does not fit " + printFormula(*cur));
    }
  }
  return {k - 1, Context::at(s[k - 1], steps)};
}

// --context: "auto", a hole path, or a literal such as "<><>[.]".
std::pair<std::size_t, Context> resolveEntry(const Proof& p, std::size_t entry,
                                             const std::string& context) {
  const Sequent& s = p.conclusion();
  if (entry == 0 || entry > s.size())
    throw UsageError("--entry " + std::to_string(entry) + " out of range 1.." + std::to_string(s.size()));
  if (context == "auto") {
    std::vector<Context> negative;
    for (auto& e : contextsFor(s[entry - 1]))
      if (e.polarity == Polarity::Negative) negative.push_back(e.context);
    if (negative.size() != 1)
      throw PreconditionError("formula " + std::to_string(entry) + " has " +
                              std::to_string(negative.size()) +
                              " negative contexts; pass --context explicitly");
    return {entry - 1, negative.front()};
  }
  if (context.find("[.]") != std::string::npos) return {entry - 1, parseContext(context)};
  return contextFromPath(s, context);
}

Proof loadProof(const std::string& path) { return parseProof(readInput(path)); }

void printMachineStep(const OccurrenceGraph& g, std::size_t k, const Token& t, const GateEvent* e) {
  std::cerr << k << " " << occurrenceOf(g, t).str() << " " << printContext(t.context) << " "
            << t.stack.str() << "\n";
  if (e != nullptr) {
    auto name = gates::nameOf(e->gate);
    std::cerr << "  apply " << (name ? *name : "U") << (e->adjoint ? "*" : "") << " of q-rule "
              << printPath(e->node) << " at offset " << e->offset << "\n";
  }
}

int runCli(int argc, char** argv) {
  CLI::App app{"qmll: proofs, cut elimination and the quantum interaction abstract machine"};
  app.require_subcommand(1);

  std::string input = "-";
  bool trace = false, traceMachine = false, pruneIdentity = false;
  std::string strategy = "leftmost-innermost", context = "auto", registerText;
  std::uint64_t seed = 0;
  std::size_t entry = 1;

  auto* check = app.add_subcommand("check", "check a proof and print its conclusion");
  auto* normalizeCmd = app.add_subcommand("normalize", "eliminate cuts");
  auto* runCmd = app.add_subcommand("run", "run the machine on a register");
  auto* semantics = app.add_subcommand("semantics", "unitary denoted by a proof");
  auto* encodeCmd = app.add_subcommand("encode", "encode a circuit JSON as a proof");
  auto* extractCmd = app.add_subcommand("extract", "extract a circuit JSON from a proof");
  auto* mll = app.add_subcommand("mll-matrix", "axiom-link matrix of a cut-free MLL proof");

  for (auto* cmd : {check, normalizeCmd, runCmd, semantics, encodeCmd, extractCmd, mll})
    cmd->add_option("file", input, "input file, or - for stdin")->capture_default_str();
  normalizeCmd->add_flag("--trace", trace, "print each reduction step to stderr");
  normalizeCmd->add_option("--strategy", strategy, "leftmost-innermost or random")
      ->check(CLI::IsMember({"leftmost-innermost", "random"}))
      ->capture_default_str();
  normalizeCmd->add_option("--seed", seed, "seed for the random strategy")->capture_default_str();
  for (auto* cmd : {runCmd, semantics, extractCmd}) {
    cmd->add_option("--entry", entry, "conclusion formula the token enters (1-based)")
        ->capture_default_str();
    cmd->add_option("--context", context, "auto, a hole path like 1.M.M, or a literal like <>[.]")
        ->capture_default_str();
    cmd->add_flag("--trace-machine", traceMachine, "print each machine step to stderr");
  }
  runCmd->add_option("--input", registerText, "register: JSON amplitudes or a label like |010>")
      ->required();
  extractCmd->add_flag("--prune-identity", pruneIdentity, "drop identity gates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  auto observer = [&](const OccurrenceGraph& g) -> TokenObserver {
    if (!traceMachine) return {};
    return [&g](std::size_t k, const Token& t, const GateEvent* e) { printMachineStep(g, k, t, e); };
  };

  if (check->parsed()) {
    Proof p = parseProofUnchecked(readInput(input));
    CheckReport r = qmll::check(p);
    if (!r.ok) {
      std::cout << r.str() << "\n";
      return 1;
    }
    std::cout << "ok " << printSequent(p.conclusion()) << "\n";
    return 0;
  }
  if (normalizeCmd->parsed()) {
    Proof p = loadProof(input);
    Strategy s = strategy == "random" ? Strategy::random(seed) : Strategy::leftmostInnermost();
    auto t = normalize(p, s);
    if (trace) {
      for (std::size_t k = 0; k < t.steps.size(); ++k)
        std::cerr << "step " << (k + 1) << ": " << t.steps[k].redex.str() << ", weight "
                  << t.steps[k].weightBefore << " -> " << t.steps[k].weightAfter << "\n";
      std::cerr << "normal form after " << t.steps.size() << " steps\n";
    }
    std::cout << printProof(t.final) << "\n";
    return 0;
  }
  if (encodeCmd->parsed()) {
    Circuit c = parseCircuit(readInput(input));
    checkQubits(c.qubits);
    std::cout << printProof(encode(c)) << "\n";
    return 0;
  }
  if (mll->parsed()) {
    Proof p = loadProof(input);
    std::cout << matrixToJson(mllAxiomLinkMatrix(p)).dump() << "\n";
    return 0;
  }

  Proof p = loadProof(input);
  auto [position, ctx] = resolveEntry(p, entry, context);
  checkQubits(ctx.depth());
  OccurrenceGraph g(p);

  if (runCmd->parsed()) {
    StateVector reg = parseRegister(registerText);
    if (reg.qubits() != ctx.depth())
      throw PreconditionError("register has " + std::to_string(reg.qubits()) +
                              " qubits, the context " + printContext(ctx) + " needs " +
                              std::to_string(ctx.depth()));
    MachineRun r = run(g, MachineState{initialToken(g, position, ctx), std::move(reg)}, observer(g));
    Json out{{"exit", {{"occurrence", occurrenceOf(g, r.final.token).str()},
                       {"context", printContext(r.final.token.context)}}},
             {"steps", r.steps},
             {"register", stateToJson(r.final.reg)}};
    std::cout << out.dump() << "\n";
    return 0;
  }
  if (semantics->parsed()) {
    SemanticsResult r = semanticsRelative(g, position, ctx, observer(g));
    std::cout << matrixToJson(r.unitary.matrix()).dump() << "\n";
    return 0;
  }
  // extract
  if (traceMachine) semanticsRelative(g, position, ctx, observer(g));
  Circuit c = extract(p, position, ctx, pruneIdentity);
  std::cout << circuitToJson(c).dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return runCli(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "qmll: " << e.what() << "\n";
    return 2;
  } catch (const qmll::SyntaxError& e) {
    std::cerr << "qmll: syntax error: " << e.what() << "\n";
    return 2;
  } catch (const qmll::Error& e) {
    std::cerr << "qmll: " << e.what() << "\n";
    return 1;
  }
}
