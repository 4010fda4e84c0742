#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "popdyn/maps.hpp"

namespace popdyn {

enum class StabilityTag { Sink, Source, Saddle, NonHyperbolic, Indeterminate };

const char* to_string(StabilityTag tag);

/// A stability verdict plus the inequality (or eigenvalue test) that produced it.
struct StabilityClass {
    StabilityTag tag = StabilityTag::Indeterminate;
    std::string detail;
};

/// Default half-width of the band around |lambda| = 1 (and around each
/// closed-form inequality boundary) treated as non-hyperbolic.
inline constexpr double kDefaultNonHyperbolicTol = 1e-9;

enum class EquilibriumKind { Trivial, Boundary, Interior };

const char* to_string(EquilibriumKind kind);

struct EquilibriumReport {
    std::string name;  // x1, x2, xh, e0, e1, e2
    State point;
    EquilibriumKind kind = EquilibriumKind::Trivial;
    bool exists = false;
    std::string condition;
    // Both are empty when the equilibrium does not exist.
    std::optional<StabilityClass> class_theorem;
    std::optional<StabilityClass> class_eigen;
    std::vector<std::complex<double>> eigenvalues;  // one entry for 1-D maps
    bool agreement = false;

    /// Closed-form verdict, falling back to the eigenvalue verdict when the
    /// closed-form conditions do not cover the parameter point.
    std::optional<StabilityClass> verdict() const;
};

struct Matrix2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a21; }
};

/// F(lambda) = lambda^2 + p lambda + q.
struct JuryQuadratic {
    double p = 0.0;
    double q = 0.0;

    double operator()(double lambda) const { return lambda * lambda + p * lambda + q; }
    static JuryQuadratic of(const Matrix2& j) { return {-j.trace(), j.det()}; }
};

/// Constants controlling the interior equilibrium e2 = (x*, y*).
/// `m1` is the coefficient obtained when the F(-1) > 0 condition is solved
/// for r, i.e. x* (d k1 - 2 k e^{x*}). `m1_alt` is the variant
/// d k1 - 2 x* k e^{x*}, kept so the two can be compared.
struct InteriorConstants {
    double x_star = 0.0;
    double k1 = 0.0;
    double n = 0.0;
    double m1 = 0.0;
    double m1_alt = 0.0;
    double m2 = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
    double s_lo = 0.0;  // max{k1, M2/M1}
    double s_hi = 0.0;  // N2/N1

    bool s_well_formed() const { return s_lo < s_hi; }
};

enum class SaddleThreshold { Derived, Alternate };

enum class SingleEquilibrium { Trivial, Positive };

// --- single species -------------------------------------------------------

/// f'(x) for x' = r x / (1 + k e^x) - h x.
double derivative_single(const SingleParams& p, double x);

/// Positive equilibrium ln((r - (1+h)) / (k (1+h))), if it exists.
std::optional<double> positive_equilibrium_single(const SingleParams& p);

StabilityClass classify_single_theorem(const SingleParams& p, SingleEquilibrium which,
                                       double tol = kDefaultNonHyperbolicTol);

std::vector<EquilibriumReport> equilibria_single(const SingleParams& p,
                                                 double tol = kDefaultNonHyperbolicTol);

// --- prey-predator ----------------------------------------------------------

Matrix2 jacobian_pair(const PairParams& p, const State& s);

std::optional<State> boundary_equilibrium(const PairParams& p);
std::optional<State> interior_equilibrium(const PairParams& p);

InteriorConstants interior_constants(const PairParams& p);

StabilityClass classify_e0_theorem(const PairParams& p, double tol = kDefaultNonHyperbolicTol);
StabilityClass classify_e1_theorem(const PairParams& p, double tol = kDefaultNonHyperbolicTol);
StabilityClass classify_e2_theorem(const PairParams& p, double tol = kDefaultNonHyperbolicTol,
                                   SaddleThreshold threshold = SaddleThreshold::Derived);

std::vector<EquilibriumReport> equilibria_pair(const PairParams& p,
                                               double tol = kDefaultNonHyperbolicTol);

// --- generic tests ------------------------------------------------------------

/// Roots of lambda^2 - tr lambda + det, using the cancellation-free form for
/// the smaller real root.
std::array<std::complex<double>, 2> eigenvalues(const Matrix2& j);

StabilityClass classify_by_eigen(const Matrix2& j, double tol = kDefaultNonHyperbolicTol);
StabilityClass classify_by_eigen(double derivative, double tol = kDefaultNonHyperbolicTol);

/// Root location of F relative to the unit circle from F(1), F(-1) and q.
/// Returns Indeterminate when F(1) <= 0. Comparisons against zero/one use
/// `tol` as an absolute band (0 means exact).
StabilityClass jury_classify(const JuryQuadratic& f, double tol = 0.0);

}  // namespace popdyn
