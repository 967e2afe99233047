#include "driftids/errors.hpp"

namespace driftids {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::dimension: return "dimension";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::contract: return "contract";
        case ErrorKind::config: return "config";
        case ErrorKind::data: return "data";
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::schema: return "schema";
        case ErrorKind::value: return "value";
        case ErrorKind::io: return "io";
        case ErrorKind::undefined_metric: return "undefined_metric";
    }
    return "unknown";
}

}  // namespace driftids
