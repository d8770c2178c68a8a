#pragma once

#include <stdexcept>
#include <string>

namespace hclab {

// Base of every library error; `kind()` is the stable tag used by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define HCLAB_ERROR(Name, tag)                                                   \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& what) : Error(tag, what) {}             \
    }

HCLAB_ERROR(RangeError, "range");
HCLAB_ERROR(ArgumentError, "argument");
HCLAB_ERROR(PreconditionError, "precondition");
HCLAB_ERROR(DomainError, "domain");
HCLAB_ERROR(InfeasibleError, "infeasible");
HCLAB_ERROR(IntegrabilityError, "integrability");
HCLAB_ERROR(ApproximationError, "approximation");
HCLAB_ERROR(ConfigError, "config");
HCLAB_ERROR(TruncationError, "truncation");
HCLAB_ERROR(DegenerateError, "degenerate");
HCLAB_ERROR(PoleError, "pole");
HCLAB_ERROR(RegimeError, "regime");

#undef HCLAB_ERROR

class ConstructionError : public Error {
public:
    ConstructionError(const std::string& what, int index)
        : Error("construction", what), index_(index) {}
    int index() const noexcept { return index_; }

private:
    int index_;
};

}  // namespace hclab
