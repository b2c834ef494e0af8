#include "slowavg/error.hpp"

namespace slowavg {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankCapExceeded: return "rank_cap_exceeded";
    case ErrorKind::PrecisionTooLow: return "precision_too_low";
    case ErrorKind::MaterializationLimit: return "materialization_limit";
    case ErrorKind::EvaluationBudget: return "evaluation_budget_exceeded";
    case ErrorKind::ExactThresholdExceeded: return "exact_threshold_exceeded";
    case ErrorKind::ScaleSearchExhausted: return "scale_search_exhausted";
    case ErrorKind::CertificationFailed: return "certification_failed";
    case ErrorKind::BudgetExhausted: return "budget_exhausted";
    case ErrorKind::PreconditionViolated: return "precondition_violated";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Parse: return "parse_error";
  }
  return "unknown";
}

}  // namespace slowavg
