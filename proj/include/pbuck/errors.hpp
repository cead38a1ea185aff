#pragma once

// Exception hierarchy shared by every pbuck module. Each failure category the
// CLI distinguishes has its own type so callers can map it to an exit status.

#include <stdexcept>
#include <string>
#include <utility>

namespace pbuck {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite number handed to a pure model function.
struct NumericDomainError : Error {
    using Error::Error;
};

/// Physical parameter outside its admissible range (L <= 0, Vin <= 0, ...).
struct ParameterError : Error {
    using Error::Error;
};

/// Requested setpoint cannot be reached by a buck stage (Vref >= Vin).
struct InfeasibleOperatingPoint : Error {
    using Error::Error;
};

/// The coupling constant X is too close to zero for the sharing law.
struct DegenerateConfiguration : Error {
    using Error::Error;
};

struct ScheduleError : Error {
    using Error::Error;
};

/// Integration produced a non-finite or unbounded stage value.
struct DivergenceError : Error {
    DivergenceError(const std::string& what, double time, std::string component)
        : Error(what), t(time), component(std::move(component)) {}
    double t;
    std::string component;
};

/// An inductor current fell below -ccm_tol, leaving continuous conduction.
struct CcmViolation : Error {
    CcmViolation(const std::string& what, double time) : Error(what), t(time) {}
    double t;
};

/// Bad argument to a post-processing routine (empty or unsorted trace).
struct InputError : Error {
    using Error::Error;
};

/// File could not be opened, read or written.
struct IoError : Error {
    using Error::Error;
};

/// Malformed CSV trace (missing column, bad header).
struct FormatError : Error {
    using Error::Error;
};

/// Scenario-file problem. `line` is 1-based (0 when no single line applies).
struct ParseError : Error {
    enum class Kind { syntax, missing_key, unknown_key, non_numeric, invalid_value };

    ParseError(Kind k, int line_no, std::string key_name, const std::string& message)
        : Error(describe(line_no, key_name, message)), kind(k), line(line_no), key(std::move(key_name)) {}

    Kind kind;
    int line;
    std::string key;

private:
    static std::string describe(int line_no, const std::string& key_name, const std::string& message) {
        std::string out;
        if (line_no > 0) out += "line " + std::to_string(line_no) + ": ";
        if (!key_name.empty()) out += "'" + key_name + "': ";
        return out + message;
    }
};

}  // namespace pbuck
