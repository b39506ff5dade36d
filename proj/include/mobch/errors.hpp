// errors.hpp
// Exception hierarchy shared by all mobch modules.

#ifndef MOBCH_ERRORS_HPP
#define MOBCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mobch {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the open domain I of the potential.
struct DomainViolation : Error {
    explicit DomainViolation(const std::string& msg) : Error(msg) {}
};

// Iterative solver (root finder, CG) exceeded its iteration cap.
struct ConvergenceFailure : Error {
    explicit ConvergenceFailure(const std::string& msg) : Error(msg) {}
};

// Right-hand side of a pure Neumann solve was not mean-free.
struct MeanNotZero : Error {
    explicit MeanNotZero(const std::string& msg) : Error(msg) {}
};

// Cell mobility values escaped [alpha, mu_upper].
struct BoundsViolation : Error {
    explicit BoundsViolation(const std::string& msg) : Error(msg) {}
};

// Initial datum mean outside the admissible band |mean| <= m.
struct MeanBoundViolation : Error {
    explicit MeanBoundViolation(const std::string& msg) : Error(msg) {}
};

// Nonlinear solve failed; carries the time step index where it happened.
struct NewtonDivergence : Error {
    long step_index;
    NewtonDivergence(const std::string& msg, long step)
        : Error(msg), step_index(step) {}
};

struct TimesNotInTrajectory : Error {
    explicit TimesNotInTrajectory(const std::string& msg) : Error(msg) {}
};

struct WrongPotentialClass : Error {
    explicit WrongPotentialClass(const std::string& msg) : Error(msg) {}
};

struct MismatchedSampling : Error {
    explicit MismatchedSampling(const std::string& msg) : Error(msg) {}
};

struct RadiusInfeasible : Error {
    explicit RadiusInfeasible(const std::string& msg) : Error(msg) {}
};

struct NoValidFit : Error {
    explicit NoValidFit(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
    int line;
    std::string key;
    ParseError(int line_, std::string key_, const std::string& reason)
        : Error("line " + std::to_string(line_) +
                (key_.empty() ? "" : " (key '" + key_ + "')") + ": " + reason),
          line(line_), key(std::move(key_)) {}
};

struct UnknownKey : ParseError {
    UnknownKey(int line, std::string key, const std::string& reason)
        : ParseError(line, std::move(key), reason) {}
};

struct MissingRequired : ParseError {
    explicit MissingRequired(const std::string& key)
        : ParseError(0, key, "required key missing") {}
};

} // namespace mobch

#endif
