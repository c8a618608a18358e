#pragma once

#include <stdexcept>
#include <string>

namespace fibermem {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Isoparametric Jacobian vanishes (or flips sign) at an evaluation point.
class DegenerateElement : public Error {
public:
    DegenerateElement(int element, const std::string& what)
        : Error("element " + std::to_string(element) + ": " + what), element_(element) {}
    int element() const noexcept { return element_; }

private:
    int element_;
};

// Base 3D law cannot satisfy the membrane stress assumptions (gamma != 0).
class MembraneIncompatibility : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    SingularSystem(int null_modes, const std::string& what)
        : Error(what), null_modes_(null_modes) {}
    int null_modes() const noexcept { return null_modes_; }

private:
    int null_modes_;
};

class InvalidLoad : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class OptimizationError : public Error {
public:
    using Error::Error;
};

}  // namespace fibermem
