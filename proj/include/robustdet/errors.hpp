#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robustdet {

enum class ErrorKind {
  parameter,            // invalid family / model parameter
  domain,               // argument outside its mathematical domain
  argument,             // malformed or inconsistent arguments
  absolute_continuity,  // discrete dominance integral undefined
  uniqueness_violation, // two distinct dominated members found
  not_positive_definite,
  estimation_infeasible,
  numerical,
  config,
  io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the toolkit; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Same kind, message prefixed with the stage that failed.
  Error in_stage(std::string_view stage) const {
    return Error(kind_, std::string(stage) + ": " + what());
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace robustdet
