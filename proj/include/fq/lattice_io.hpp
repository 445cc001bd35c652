#ifndef FQ_LATTICE_IO_HPP
#define FQ_LATTICE_IO_HPP

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fq/lattice.hpp"

namespace fq {

// Lattice definition file: a JSON object with exactly the keys
//   name      string
//   elements  list of strings
//   order     list of [lower, upper] Hasse edges
// Unknown keys are rejected.
inline LatticeSpec lattice_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw LatticeError(LatticeErrorKind::BadFile, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw LatticeError(LatticeErrorKind::BadFile, "expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "name" && key != "elements" && key != "order")
      throw LatticeError(LatticeErrorKind::BadFile, "unknown key '" + key + "'");
  if (!j.contains("name") || !j["name"].is_string())
    throw LatticeError(LatticeErrorKind::BadFile, "missing string key 'name'");
  if (!j.contains("elements") || !j["elements"].is_array())
    throw LatticeError(LatticeErrorKind::BadFile, "missing list key 'elements'");
  if (!j.contains("order") || !j["order"].is_array())
    throw LatticeError(LatticeErrorKind::BadFile, "missing list key 'order'");
  LatticeSpec spec;
  spec.name = j["name"].get<std::string>();
  for (const auto& e : j["elements"]) {
    if (!e.is_string()) throw LatticeError(LatticeErrorKind::BadFile, "elements must be strings");
    spec.elements.push_back(e.get<std::string>());
  }
  for (const auto& e : j["order"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw LatticeError(LatticeErrorKind::BadFile, "order entries must be [lower, upper] pairs");
    spec.hasse_edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return spec;
}

inline FiniteLattice load_lattice_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LatticeError(LatticeErrorKind::BadFile, "cannot open lattice file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return validate_lattice(lattice_spec_from_json(buf.str()));
}

}  // namespace fq

#endif  // FQ_LATTICE_IO_HPP
