#pragma once

#include <stdexcept>
#include <string>

namespace qwb {

/// Raised when a matrix inversion or solve hits a (numerically) singular
/// pivot. Carries which sub-matrix of a low-rank-update inverse failed and a
/// pivot-ratio condition estimate for it.
class SingularMatrixError : public std::runtime_error {
public:
    enum class Part { A, C, Capacitance, Generic };

    SingularMatrixError(Part part, double condition_estimate, const std::string& what)
        : std::runtime_error(what), part_(part), condition_estimate_(condition_estimate) {}

    Part part() const { return part_; }
    double condition_estimate() const { return condition_estimate_; }

    static const char* part_name(Part p) {
        switch (p) {
        case Part::A: return "A";
        case Part::C: return "C";
        case Part::Capacitance: return "capacitance";
        default: return "matrix";
        }
    }

private:
    Part part_;
    double condition_estimate_;
};

/// A request exceeded a hard size limit (statevector width, oracle dimension).
class SizeCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The closed-form conditioning formula was evaluated outside its domain
/// (negative radicand / singular target matrix).
class ConjectureDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A denominator of the form 1 + a*<v|u> (or a capacitance pivot) is too close
/// to zero for the division to be meaningful at the current precision.
class NearSingularDenominator : public std::runtime_error {
public:
    NearSingularDenominator(double magnitude, double tolerance, const std::string& what)
        : std::runtime_error(what), magnitude_(magnitude), tolerance_(tolerance) {}

    double magnitude() const { return magnitude_; }
    double tolerance() const { return tolerance_; }

private:
    double magnitude_;
    double tolerance_;
};

} // namespace qwb
