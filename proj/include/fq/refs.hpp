#ifndef FQ_REFS_HPP
#define FQ_REFS_HPP

#include <map>
#include <sstream>
#include <string>

#include "fq/ast.hpp"
#include "fq/eval.hpp"
#include "fq/typecheck.hpp"

namespace fq {

// Runtime store environment: location -> content type.
using StoreTyping = std::map<int, QualType>;

inline QualType type_of_fm(const FiniteLattice& L, const Env& env, const StoreTyping& sigma,
                           const TermPtr& t) {
  CheckContext ctx;
  ctx.calculus = Calculus::Fm;
  ctx.base = &L;
  ctx.store_typing = &sigma;
  return type_of(ctx, env, t);
}

inline QualType type_of_fm(const Env& env, const StoreTyping& sigma, const TermPtr& t) {
  return type_of_fm(two_point(), env, sigma, t);
}

// Every allocated cell holds a value typeable at a subtype of its store
// typing entry; used by the preservation suite after each step.
inline bool store_consistent(const FiniteLattice& L, const StoreTyping& sigma, const Store& store) {
  for (const auto& [id, entry] : store.cells()) {
    auto it = sigma.find(id);
    if (it == sigma.end()) return false;
    try {
      QualType ty = type_of_fm(L, Env{}, sigma, entry.value);
      if (!subtype_holds(Env{}, L, ty, it->second)) return false;
    } catch (const TypeError&) {
      return false;
    }
  }
  return true;
}

// Deterministic rendering, sorted by location id.
inline std::string print_store(const Store& store) {
  std::ostringstream os;
  for (const auto& [id, entry] : store.cells())
    os << '#' << id << " [" << entry.tag << "] " << print_term(entry.value) << '\n';
  return os.str();
}

}  // namespace fq

#endif  // FQ_REFS_HPP
