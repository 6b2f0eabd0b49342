#pragma once

// JSON forms of matrices, registers and circuits. Complex numbers are
// [re, im] pairs; a bare number is read as a real.
//
//   circuit: {"qubits": 2, "gates": [{"gate": "H", "targets": [1]},
//                                    {"matrix": [[[0,0],[1,0]],[[1,0],[0,0]]], "targets": [2]}]}
//   register: [[0.707,0],[0,0],[0.707,0],[0,0]]  or the label "|01>"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qmll/circuit.hpp"
#include "qmll/error.hpp"
#include "qmll/matrix.hpp"

namespace qmll {

using Json = nlohmann::json;

inline Json complexToJson(Complex z) {
  // Normalize negative zero so printed output is stable.
  return Json::array({z.real() + 0.0, z.imag() + 0.0});
}

inline Complex complexFromJson(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw SyntaxError("expected a number or an [re, im] pair, got " + j.dump(), 0);
}

inline Json matrixToJson(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(complexToJson(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrixFromJson(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw SyntaxError("matrix must be a non-empty array of rows", 0);
  const std::size_t cols = j[0].size();
  ComplexMatrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw SyntaxError("matrix rows differ in length", 0);
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = complexFromJson(j[r][c]);
  }
  return m;
}

inline Json stateToJson(const StateVector& v) {
  Json out = Json::array();
  for (const auto& a : v.amplitudes()) out.push_back(complexToJson(a));
  return out;
}

inline StateVector stateFromJson(const Json& j) {
  if (!j.is_array()) throw SyntaxError("register must be an array of amplitudes", 0);
  std::vector<Complex> amps;
  for (const auto& a : j) amps.push_back(complexFromJson(a));
  auto n = qubitCount(amps.size());
  if (!n || amps.empty()) throw SyntaxError("register length is not a power of two", 0);
  return StateVector(*n, std::move(amps));
}

// Parses "|0110>" or a JSON amplitude array.
inline StateVector parseRegister(const std::string& text) {
  std::size_t b = text.find_first_not_of(" \t\r\n");
  std::size_t e = text.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) throw SyntaxError("empty register", 0);
  std::string t = text.substr(b, e - b + 1);
  if (t.front() == '|') {
    if (t.size() < 2 || t.back() != '>') throw SyntaxError("basis label must look like |010>", 0);
    std::string bits = t.substr(1, t.size() - 2);
    std::size_t index = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      if (bits[k] != '0' && bits[k] != '1') throw SyntaxError("basis label digit must be 0 or 1", k + 1);
      index = (index << 1) | static_cast<std::size_t>(bits[k] - '0');
    }
    return StateVector::basis(bits.size(), index);
  }
  Json j;
  try {
    j = Json::parse(t);
  } catch (const Json::parse_error& err) {
    throw SyntaxError(std::string("register: ") + err.what(), err.byte);
  }
  return stateFromJson(j);
}

inline Json circuitToJson(const Circuit& c) {
  Json gatesJson = Json::array();
  for (const auto& g : c.gates) {
    Json entry;
    if (!g.name.empty())
      entry["gate"] = g.name;
    else
      entry["matrix"] = matrixToJson(g.unitary.matrix());
    entry["targets"] = g.targets;
    gatesJson.push_back(std::move(entry));
  }
  return Json{{"qubits", c.qubits}, {"gates", std::move(gatesJson)}};
}

inline Circuit circuitFromJson(const Json& j) {
  if (!j.is_object() || !j.contains("qubits") || !j["qubits"].is_number_unsigned())
    throw SyntaxError("circuit needs a non-negative integer \"qubits\" field", 0);
  Circuit c;
  c.qubits = j["qubits"].get<std::size_t>();
  if (j.contains("gates")) {
    if (!j["gates"].is_array()) throw SyntaxError("\"gates\" must be an array", 0);
    for (const auto& g : j["gates"]) {
      if (!g.is_object() || !g.contains("targets") || !g["targets"].is_array())
        throw SyntaxError("each gate needs a \"targets\" array", 0);
      std::vector<std::size_t> targets;
      for (const auto& t : g["targets"]) {
        if (!t.is_number_unsigned()) throw SyntaxError("targets must be positive integers", 0);
        targets.push_back(t.get<std::size_t>());
      }
      if (g.contains("gate") && g["gate"].is_string()) {
        c.add(g["gate"].get<std::string>(), std::move(targets));
      } else if (g.contains("matrix")) {
        c.add(UnitaryMatrix(matrixFromJson(g["matrix"])), std::move(targets));
      } else {
        throw SyntaxError("each gate needs a \"gate\" name or a \"matrix\"", 0);
      }
    }
  }
  validate(c);
  return c;
}

inline Circuit parseCircuit(const std::string& text) {
  try {
    return circuitFromJson(Json::parse(text));
  } catch (const Json::parse_error& err) {
    throw SyntaxError(std::string("circuit: ") + err.what(), err.byte);
  }
}

}  // namespace qmll
