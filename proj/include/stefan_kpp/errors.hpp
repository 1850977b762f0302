#pragma once

#include <stdexcept>
#include <string>

namespace skpp {

// Base class for all toolkit failures so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ODE integration exceeded the step budget without triggering an event.
class StepLimitExceeded : public Error {
public:
    explicit StepLimitExceeded(const std::string& msg) : Error(msg) {}
};

// A shooting trajectory left the admissible region without reaching its target.
class ShootFailed : public Error {
public:
    explicit ShootFailed(const std::string& msg) : Error(msg) {}
};

// Requested compact bump with b outside (0, P(gamma)).
class NotInS1 : public Error {
public:
    explicit NotInS1(const std::string& msg) : Error(msg) {}
};

// Requested tadpole with b outside (0, P(gamma)).
class NotInS2 : public Error {
public:
    explicit NotInS2(const std::string& msg) : Error(msg) {}
};

// Root bracketing failed: signs equal at both endpoints.
class BracketFailed : public Error {
public:
    explicit BracketFailed(const std::string& msg) : Error(msg) {}
};

// Two independent characterizations of the same constant disagree.
class ConsistencyFailed : public Error {
public:
    explicit ConsistencyFailed(const std::string& msg) : Error(msg) {}
};

// Operation requested outside its advection regime.
class RegimeError : public Error {
public:
    explicit RegimeError(const std::string& msg) : Error(msg) {}
};

class InvalidInitialData : public Error {
public:
    explicit InvalidInitialData(const std::string& msg) : Error(msg) {}
};

// Solution magnitude left the a-priori bound; carries the failing time.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(const std::string& msg, double t) : Error(msg), t_fail(t) {}
    double t_fail;
};

class WindowExceedsDomain : public Error {
public:
    explicit WindowExceedsDomain(const std::string& msg) : Error(msg) {}
};

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string& msg) : Error(msg) {}
};

// Threshold search hit sigma_max while every verdict stayed in the lower class.
class NoUpperClassFound : public Error {
public:
    explicit NoUpperClassFound(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace skpp
