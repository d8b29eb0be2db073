#ifndef CRNGNET_ERRORS_HPP
#define CRNGNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace crngnet {

// Thrown when an operation would exceed the desk-scale enumeration guards.
// Callers can retry with a smaller instance; nothing is left half-computed.
class ResourceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace crngnet

#endif  // CRNGNET_ERRORS_HPP
