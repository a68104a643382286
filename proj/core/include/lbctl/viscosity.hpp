#pragma once

namespace lbctl {

/// Nonlocal (spatially global) viscosity coefficient.
///
/// L2:  nu0 + nu1 * integral |grad w|^2
/// Lp:  nu0 + nu1 * (integral |grad w|^p)^(2/p),  3 < p <= 6  (p == 2 is
///      accepted and coincides with L2).
struct ViscosityLaw {
    enum class Kind { L2, Lp };

    Kind kind = Kind::L2;
    double nu0 = 1.0;
    double nu1 = 0.0;
    double p = 2.0;

    /// Throws DomainError when the parameters are outside the admissible set.
    void validate() const;

    static ViscosityLaw l2(double nu0, double nu1) { return {Kind::L2, nu0, nu1, 2.0}; }
    static ViscosityLaw lp(double nu0, double nu1, double p) { return {Kind::Lp, nu0, nu1, p}; }
};

}  // namespace lbctl
