#ifndef FQ_DIAG_HPP
#define FQ_DIAG_HPP

#include <exception>
#include <string>
#include <utility>

#include "fq/ast.hpp"

namespace fq {

// Stable diagnostic codes; docs/diagnostics.md lists them all.
namespace diag_code {
inline constexpr const char* parse = "E-PARSE";
inline constexpr const char* unbound = "E-UNBOUND";
inline constexpr const char* type = "E-TYPE";
inline constexpr const char* subqual = "E-SUBQUAL";
inline constexpr const char* bound = "E-BOUND";
inline constexpr const char* write_readonly = "E-WRITE-READONLY";
inline constexpr const char* colour = "E-COLOUR";
inline constexpr const char* capture = "E-CAPTURE";
inline constexpr const char* wf = "E-WF";
inline constexpr const char* assert_failed = "E-ASSERT";
inline constexpr const char* sealed = "E-SEALED";
inline constexpr const char* barrier = "E-BARRIER";
inline constexpr const char* stuck = "E-STUCK";
inline constexpr const char* fuel = "E-FUEL";
inline constexpr const char* lattice = "E-LATTICE";
inline constexpr const char* io = "E-IO";
}  // namespace diag_code

struct Diagnostic {
  std::string severity = "error";
  Span span;
  std::string code;
  std::string message;
  std::string trace;  // optional derivation trace
};

class TypeError : public std::exception {
 public:
  explicit TypeError(Diagnostic d) : diag_(std::move(d)), what_(diag_.code + ": " + diag_.message) {}
  const Diagnostic& diag() const { return diag_; }
  const char* what() const noexcept override { return what_.c_str(); }

 private:
  Diagnostic diag_;
  std::string what_;
};

[[noreturn]] inline void fail(const char* code, const Span& span, const std::string& msg) {
  throw TypeError(Diagnostic{"error", span, code, msg, ""});
}

}  // namespace fq

#endif  // FQ_DIAG_HPP
