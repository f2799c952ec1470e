#include "riskflow/core/errors.hpp"

#include <utility>

namespace riskflow {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::evaluation: return "evaluation";
        case ErrorKind::simulation: return "simulation";
        case ErrorKind::statistics: return "statistics";
        case ErrorKind::solver: return "solver";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::usage: return "usage";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

}  // namespace riskflow
