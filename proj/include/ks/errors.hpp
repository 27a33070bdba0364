#ifndef KS_ERRORS_HPP
#define KS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ks {

/// ODE integration failed (state left the admissible region or the step
/// size underflowed). Carries the location where integration stopped.
class integration_error : public std::runtime_error {
public:
    integration_error(const std::string& what, double y)
        : std::runtime_error(what + " (at y = " + std::to_string(y) + ")"), y_(y) {}
    double where() const { return y_; }
private:
    double y_;
};

/// A computed solution violates one of its bound invariants.
class invariant_error : public std::runtime_error {
public:
    invariant_error(const std::string& what, double y)
        : std::runtime_error(what + " (at y = " + std::to_string(y) + ")"), y_(y) {}
    double where() const { return y_; }
private:
    double y_;
};

/// Time stepper detected runaway growth or a non-finite field.
class instability_error : public std::runtime_error {
public:
    instability_error(const std::string& what, double t)
        : std::runtime_error(what + " (at t = " + std::to_string(t) + ")"), t_(t) {}
    double when() const { return t_; }
private:
    double t_;
};

/// Field is not localized enough for an operation that needs decay at the
/// box boundary (coordinate-weighted terms, dilation, weighted norms).
class localization_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Weighted quadrature would be dominated by the weight at the boundary.
class weight_overflow_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A field that must be non-negative dipped below the tolerance.
class positivity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Root bracketing / bisection could not locate a solution.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ks

#endif
