#include "robustdet/errors.hpp"

namespace robustdet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::argument: return "argument error";
    case ErrorKind::absolute_continuity: return "absolute-continuity error";
    case ErrorKind::uniqueness_violation: return "uniqueness violation";
    case ErrorKind::not_positive_definite: return "not positive definite";
    case ErrorKind::estimation_infeasible: return "estimation infeasible";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::config: return "config error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

}  // namespace robustdet
