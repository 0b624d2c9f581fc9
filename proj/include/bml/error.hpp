#pragma once

#include <stdexcept>
#include <string>

namespace bml {

enum class ErrorKind {
    InvalidArgument,
    CommonFactor,
    DegreeTooLow,
    NotFixed,
    NoConvergence,
    NotAttracting,
    AttractorNotMember,
    NotInBasin,
    NoSuchComponent,
    DegenerateComponent,
    DisconnectedPair,
    OutOfDomain,
    NotPolynomial,
    BadThreshold,
    BaseNotInBasin,
    NoOrbitNodeInComponent,
    ParseError,
    ValidationError,
    IoError,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace bml
