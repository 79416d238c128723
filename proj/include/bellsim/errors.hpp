// Error types shared across the bellsim library.
#pragma once

#include <stdexcept>
#include <string>

namespace bellsim {

// Base for all input-validation failures. The CLI maps these to exit code 2.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class negative_probability_error : public validation_error {
public:
    using validation_error::validation_error;
};

class non_normalized_error : public validation_error {
public:
    using validation_error::validation_error;
};

// Raised by critical_epsilon when the ideal statistic never exceeds 2, so no
// noise threshold exists.
class no_violation_error : public validation_error {
public:
    using validation_error::validation_error;
};

// Raised by s_delta when a Delta component falls outside its admissible
// interval; carries the 1-based component index.
class constraint_violation_error : public validation_error {
public:
    constraint_violation_error(const std::string& msg, int index)
        : validation_error(msg), index_(index) {}

    int index() const noexcept { return index_; }

private:
    int index_;
};

}  // namespace bellsim
