#pragma once

#include <stdexcept>
#include <string>

namespace kslab {

enum class ErrorKind {
    schema,             // missing column, malformed header
    parse,              // non-numeric cell
    empty_input,        // empty file or nothing left after filtering
    integrity,          // fixture shape mismatch
    io,
    degenerate_sample,  // too few values for the requested moment
    zero_variance,
    singular_design,
    domain,             // argument outside the function's domain
    not_beta_representable,
    infeasible_moments,
    unsupported,
    insufficient_data,
    internal,
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
        case ErrorKind::schema: return "schema";
        case ErrorKind::parse: return "parse";
        case ErrorKind::empty_input: return "empty-input";
        case ErrorKind::integrity: return "integrity";
        case ErrorKind::io: return "io";
        case ErrorKind::degenerate_sample: return "degenerate-sample";
        case ErrorKind::zero_variance: return "zero-variance";
        case ErrorKind::singular_design: return "singular-design";
        case ErrorKind::domain: return "domain";
        case ErrorKind::not_beta_representable: return "not-beta-representable";
        case ErrorKind::infeasible_moments: return "infeasible-moment-pair";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::insufficient_data: return "insufficient-data";
        case ErrorKind::internal: return "internal";
    }
    return "unknown";
}

/// All library failures are reported through this type; `kind()` lets callers
/// branch without parsing the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace kslab
