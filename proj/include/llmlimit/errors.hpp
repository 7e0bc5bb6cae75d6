#pragma once

#include <stdexcept>
#include <string>

namespace llmlimit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unknown names, malformed JSON, schema violations.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Precondition violated by otherwise well-formed inputs (e.g. MA > MR).
class DomainError : public Error {
public:
    using Error::Error;
};

// Model applied to the wrong FLOP path (GQA vs MLA/MoE).
class ArchitectureError : public DomainError {
public:
    using DomainError::DomainError;
};

// The system cannot hold the workload, or a mapping constraint is violated.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

}  // namespace llmlimit
