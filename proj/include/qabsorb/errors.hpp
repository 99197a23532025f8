#pragma once

#include <stdexcept>
#include <string>

namespace qabsorb {

// Base for every error raised by the library. kind() names the family so the
// harness can tag row-level failures.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* kind() const noexcept { return "error"; }
};

#define QABSORB_ERROR(Name, tag)                                              \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& msg) : Error(msg) {}                 \
        const char* kind() const noexcept override { return tag; }            \
    };

QABSORB_ERROR(StructuralError, "structural")
QABSORB_ERROR(ParameterError, "parameter")
QABSORB_ERROR(PositivityError, "positivity")
QABSORB_ERROR(DataError, "data")
QABSORB_ERROR(ContractError, "contract")
QABSORB_ERROR(DegeneracyError, "degeneracy")
QABSORB_ERROR(GeometryError, "geometry")
QABSORB_ERROR(ConfigError, "config")

#undef QABSORB_ERROR

} // namespace qabsorb
