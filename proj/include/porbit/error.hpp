#pragma once

#include <stdexcept>
#include <string>

namespace porbit {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input failed a documented precondition (shape, range, finiteness).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Sample grid too coarse for the harmonics present in a loop.
class AliasingError : public Error {
public:
    using Error::Error;
};

/// Two bodies coincide (or nearly so) at a sample node.
class CollisionError : public Error {
public:
    CollisionError(const std::string& what, double separation)
        : Error(what), separation_(separation) {}
    double separation() const noexcept { return separation_; }

private:
    double separation_;
};

/// The connecting piece of a pair potential became non-negative.
class BlendNegativityError : public Error {
public:
    BlendNegativityError(const std::string& what, double witness)
        : Error(what), witness_(witness) {}
    double witness() const noexcept { return witness_; }

private:
    double witness_;
};

}  // namespace porbit
