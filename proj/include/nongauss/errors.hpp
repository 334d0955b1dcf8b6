#pragma once

#include <stdexcept>
#include <string>

namespace nongauss {

/// Wrong vector or matrix shape (odd phase-space dimension, size mismatch).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input failed a structural check: non-normalized mode, asymmetric matrix.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Covariance matrix violates the uncertainty principle.
class PhysicalityError : public std::domain_error {
public:
    PhysicalityError(const std::string& what, double eigenvalue)
        : std::domain_error(what), eigenvalue_(eigenvalue) {}
    double eigenvalue() const noexcept { return eigenvalue_; }

private:
    double eigenvalue_;
};

/// Photon subtraction from a mode that carries no photons.
class UndefinedSubtraction : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operation is only defined for pure Gaussian states.
class MixedStateError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested order exceeds an enumeration bound.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Fock truncation loses more norm than allowed.
class CutoffError : public std::runtime_error {
public:
    CutoffError(const std::string& what, double leakage, int suggested)
        : std::runtime_error(what), leakage_(leakage), suggested_(suggested) {}
    double leakage() const noexcept { return leakage_; }
    int suggested_cutoff() const noexcept { return suggested_; }

private:
    double leakage_;
    int suggested_;
};

/// Singular or badly conditioned linear algebra.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed covariance file or CLI argument.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nongauss
