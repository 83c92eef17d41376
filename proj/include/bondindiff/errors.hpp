#pragma once

#include <stdexcept>
#include <string>

namespace bondindiff {

// Every library failure carries the module that raised it and a stable code
// so the CLI can emit a machine-readable record and a distinct exit status.
enum class ErrorCode {
    Pole,
    Domain,
    BlowUp,
    Contour,
    Truncation,
    Bracket,
    Convergence,
    Unidentifiable,
    SchemeMismatch,
    DegenerateSample,
    ConfigParse,
    Validation,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Pole: return "pole";
        case ErrorCode::Domain: return "domain";
        case ErrorCode::BlowUp: return "blow-up";
        case ErrorCode::Contour: return "contour";
        case ErrorCode::Truncation: return "truncation";
        case ErrorCode::Bracket: return "bracket";
        case ErrorCode::Convergence: return "convergence";
        case ErrorCode::Unidentifiable: return "unidentifiable";
        case ErrorCode::SchemeMismatch: return "scheme-mismatch";
        case ErrorCode::DegenerateSample: return "degenerate-sample";
        case ErrorCode::ConfigParse: return "config-parse";
        case ErrorCode::Validation: return "validation";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string module, const std::string& message)
        : std::runtime_error(message), code_(code), module_(std::move(module)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorCode code_;
    std::string module_;
};

}  // namespace bondindiff
