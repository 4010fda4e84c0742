#include "popdyn/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "popdyn/errors.hpp"

namespace popdyn {

namespace {

bool near(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Strict membership in the open interval (lo, hi).
bool inside(double v, double lo, double hi) { return lo < v && v < hi; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

StabilityClass make(StabilityTag tag, std::string detail) { return {tag, std::move(detail)}; }

StabilityClass classify_moduli(double m1, double m2, double tol, const std::string& what) {
    if (std::abs(m1 - 1.0) <= tol || std::abs(m2 - 1.0) <= tol) {
        return make(StabilityTag::NonHyperbolic, what + " has a modulus within tolerance of 1");
    }
    if (m1 < 1.0 && m2 < 1.0) return make(StabilityTag::Sink, what + " moduli both < 1");
    if (m1 > 1.0 && m2 > 1.0) return make(StabilityTag::Source, what + " moduli both > 1");
    return make(StabilityTag::Saddle, what + " moduli straddle 1");
}

bool tags_agree(const StabilityClass& a, const StabilityClass& b) {
    if (a.tag == StabilityTag::Indeterminate || b.tag == StabilityTag::Indeterminate) return true;
    return a.tag == b.tag;
}

void fill_pair_eigen(EquilibriumReport& rep, const PairParams& p, double tol) {
    const Matrix2 j = jacobian_pair(p, rep.point);
    const auto ev = eigenvalues(j);
    rep.eigenvalues.assign(ev.begin(), ev.end());
    rep.class_eigen = classify_by_eigen(j, tol);
    rep.agreement = tags_agree(*rep.class_theorem, *rep.class_eigen);
}

}  // namespace

const char* to_string(StabilityTag tag) {
    switch (tag) {
        case StabilityTag::Sink: return "sink";
        case StabilityTag::Source: return "source";
        case StabilityTag::Saddle: return "saddle";
        case StabilityTag::NonHyperbolic: return "non-hyperbolic";
        case StabilityTag::Indeterminate: return "indeterminate";
    }
    return "?";
}

const char* to_string(EquilibriumKind kind) {
    switch (kind) {
        case EquilibriumKind::Trivial: return "trivial";
        case EquilibriumKind::Boundary: return "boundary";
        case EquilibriumKind::Interior: return "interior";
    }
    return "?";
}

std::optional<StabilityClass> EquilibriumReport::verdict() const {
    if (!exists) return std::nullopt;
    if (class_theorem && class_theorem->tag != StabilityTag::Indeterminate) return class_theorem;
    return class_eigen;
}

// --- generic ----------------------------------------------------------------

std::array<std::complex<double>, 2> eigenvalues(const Matrix2& j) {
    const double half = 0.5 * j.trace();
    const double det = j.det();
    const double disc = half * half - det;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double big = half + std::copysign(s, half);
        const double small = big != 0.0 ? det / big : 0.0;
        return {std::complex<double>(big, 0.0), std::complex<double>(small, 0.0)};
    }
    const double im = std::sqrt(-disc);
    return {std::complex<double>(half, im), std::complex<double>(half, -im)};
}

StabilityClass classify_by_eigen(const Matrix2& j, double tol) {
    const auto ev = eigenvalues(j);
    return classify_moduli(std::abs(ev[0]), std::abs(ev[1]), tol, "jacobian eigenvalue");
}

StabilityClass classify_by_eigen(double derivative, double tol) {
    const double m = std::abs(derivative);
    if (std::abs(m - 1.0) <= tol) {
        return make(StabilityTag::NonHyperbolic, "|f'| within tolerance of 1");
    }
    return m < 1.0 ? make(StabilityTag::Sink, "|f'| < 1") : make(StabilityTag::Source, "|f'| > 1");
}

StabilityClass jury_classify(const JuryQuadratic& f, double tol) {
    const double f_plus = f(1.0);
    const double f_minus = f(-1.0);
    if (f_plus <= tol) {
        return make(StabilityTag::Indeterminate, "F(1) <= 0, root-location conditions do not apply");
    }
    if (std::abs(f_minus) <= tol) {
        const bool degenerate = std::abs(f.p) <= tol || std::abs(f.p - 2.0) <= tol;
        return make(StabilityTag::NonHyperbolic,
                    degenerate ? "F(-1) = 0 with p in {0, 2}" : "F(-1) = 0: root at -1");
    }
    if (f_minus < 0.0) return make(StabilityTag::Saddle, "F(-1) < 0");
    if (std::abs(f.q - 1.0) <= tol) {
        return make(StabilityTag::NonHyperbolic, "F(-1) > 0 and q = 1: roots on the unit circle");
    }
    if (f.q < 1.0) return make(StabilityTag::Sink, "F(-1) > 0 and q < 1");
    return make(StabilityTag::Source, "F(-1) > 0 and q > 1");
}

// --- single species -----------------------------------------------------------

double derivative_single(const SingleParams& p, double x) {
    return growth_derivative(p.r(), p.k(), x) - p.h();
}

std::optional<double> positive_equilibrium_single(const SingleParams& p) {
    const double onep = 1.0 + p.h();
    const double ratio = (p.r() - onep) / (p.k() * onep);
    if (!(ratio > 1.0)) return std::nullopt;
    return std::log(ratio);
}

StabilityClass classify_single_theorem(const SingleParams& p, SingleEquilibrium which, double tol) {
    const double r = p.r();
    const double k = p.k();
    const double onep = 1.0 + p.h();
    if (which == SingleEquilibrium::Trivial) {
        const double threshold = (k + 1.0) * onep;
        if (near(r, threshold, tol)) {
            return make(StabilityTag::NonHyperbolic, "r = (k+1)(1+h)");
        }
        return r < threshold ? make(StabilityTag::Sink, "r < (k+1)(1+h)")
                             : make(StabilityTag::Source, "r > (k+1)(1+h)");
    }
    if (!positive_equilibrium_single(p)) {
        throw PreconditionError("positive equilibrium does not exist: requires (r-(1+h))/(k(1+h)) > 1");
    }
    const double surplus = r - onep;
    const double m = onep * surplus;
    const double lower = surplus * std::exp(-2.0 * r / m) / onep;
    const double upper = surplus / onep;
    if (near(k, lower, tol)) {
        return make(StabilityTag::NonHyperbolic, "k = (r-(1+h)) e^{-2r/m} / (1+h)");
    }
    if (k < lower) return make(StabilityTag::Source, "k < (r-(1+h)) e^{-2r/m} / (1+h) = " + fmt(lower));
    if (inside(k, lower, upper)) {
        return make(StabilityTag::Sink, "k in (" + fmt(lower) + ", " + fmt(upper) + ")");
    }
    return make(StabilityTag::Indeterminate, "k outside the lemma's intervals");
}

std::vector<EquilibriumReport> equilibria_single(const SingleParams& p, double tol) {
    const bool harvested = p.h() > 0.0;
    std::vector<EquilibriumReport> out;

    EquilibriumReport trivial;
    trivial.name = harvested ? "x0" : "x1";
    trivial.kind = EquilibriumKind::Trivial;
    trivial.exists = true;
    trivial.condition = "always";
    trivial.class_theorem = classify_single_theorem(p, SingleEquilibrium::Trivial, tol);
    const double d0 = derivative_single(p, 0.0);
    trivial.eigenvalues = {std::complex<double>(d0, 0.0)};
    trivial.class_eigen = classify_by_eigen(d0, tol);
    trivial.agreement = tags_agree(*trivial.class_theorem, *trivial.class_eigen);
    out.push_back(std::move(trivial));

    EquilibriumReport positive;
    positive.name = harvested ? "xh" : "x2";
    positive.kind = EquilibriumKind::Interior;
    positive.condition = "(r-(1+h))/(k(1+h)) > 1";
    if (const auto xp = positive_equilibrium_single(p)) {
        positive.point.x = *xp;
        positive.exists = true;
        positive.class_theorem = classify_single_theorem(p, SingleEquilibrium::Positive, tol);
        const double dp = derivative_single(p, *xp);
        positive.eigenvalues = {std::complex<double>(dp, 0.0)};
        positive.class_eigen = classify_by_eigen(dp, tol);
        positive.agreement = tags_agree(*positive.class_theorem, *positive.class_eigen);
    }
    out.push_back(std::move(positive));
    return out;
}

// --- prey-predator --------------------------------------------------------------

Matrix2 jacobian_pair(const PairParams& p, const State& s) {
    return {growth_derivative(p.r(), p.k(), s.x) - p.a() * s.y, -p.a() * s.x, p.d() * s.y,
            p.d() * s.x - p.c()};
}

std::optional<State> boundary_equilibrium(const PairParams& p) {
    if (!(p.r() > 1.0 + p.k())) return std::nullopt;
    return State{std::log((p.r() - 1.0) / p.k()), 0.0};
}

std::optional<State> interior_equilibrium(const PairParams& p) {
    const double xs = (1.0 + p.c()) / p.d();
    const double k1 = 1.0 + p.k() * std::exp(xs);
    if (!(p.r() > k1)) return std::nullopt;
    return State{xs, (p.r() - k1) / (p.a() * k1)};
}

InteriorConstants interior_constants(const PairParams& p) {
    InteriorConstants t;
    const double d = p.d();
    t.x_star = (1.0 + p.c()) / d;
    const double ke = p.k() * std::exp(t.x_star);
    t.k1 = 1.0 + ke;
    t.n = 2.0 * ke / t.k1;
    t.m1 = t.x_star * (d * t.k1 - 2.0 * ke);
    t.m1_alt = d * t.k1 - 2.0 * t.x_star * ke;
    t.m2 = d * t.x_star * t.k1 * t.k1 - 4.0 * t.k1 * t.k1;
    t.n1 = d * t.k1 - ke;
    t.n2 = d * t.k1 * t.k1;
    t.s_lo = std::max(t.k1, t.m2 / t.m1);
    t.s_hi = t.n2 / t.n1;
    return t;
}

StabilityClass classify_e0_theorem(const PairParams& p, double tol) {
    const double r = p.r();
    const double k = p.k();
    const double c = p.c();
    if (near(r, k + 1.0, tol) || near(c, 1.0, tol)) {
        return make(StabilityTag::NonHyperbolic, "r = k+1 or c = 1");
    }
    const bool prey_stable = r < k + 1.0;
    const bool predator_stable = c < 1.0;
    if (prey_stable && predator_stable) return make(StabilityTag::Sink, "r < k+1 and c < 1");
    if (!prey_stable && !predator_stable) return make(StabilityTag::Source, "r > k+1 and c > 1");
    return make(StabilityTag::Saddle, prey_stable ? "r < k+1 and c > 1" : "r > k+1 and c < 1");
}

StabilityClass classify_e1_theorem(const PairParams& p, double tol) {
    if (!boundary_equilibrium(p)) {
        throw PreconditionError("boundary equilibrium e1 does not exist: requires r > 1 + k");
    }
    const double r = p.r();
    const double k = p.k();
    const double c = p.c();
    const double d = p.d();
    const double top = r - 1.0;
    const double b_prey = top * std::exp(-2.0 * r / top);
    const double b_pred_lo = top * std::exp(-(c + 1.0) / d);
    const double b_pred_hi = top * std::exp(-(c - 1.0) / d);

    if (near(k, b_prey, tol)) return make(StabilityTag::NonHyperbolic, "k = (r-1) e^{-2r/(r-1)}");
    if (near(k, b_pred_lo, tol)) return make(StabilityTag::NonHyperbolic, "k = (r-1) e^{-(c+1)/d}");
    if (near(k, b_pred_hi, tol)) return make(StabilityTag::NonHyperbolic, "k = (r-1) e^{-(c-1)/d}");

    const bool in_i1 = inside(k, b_prey, top);
    const bool in_i2 = inside(k, b_pred_lo, b_pred_hi);
    const bool in_i3 = inside(k, 0.0, b_prey);
    const bool in_i4 = inside(k, b_pred_hi, top);
    const bool in_i5 = inside(k, 0.0, b_pred_lo);

    if (in_i1 && in_i2) return make(StabilityTag::Sink, "k in I1 and I2");
    if (in_i3 && in_i5) return make(StabilityTag::Source, "k in I3 and I5");
    if (in_i1 && in_i5) return make(StabilityTag::Saddle, "k in I1 and I5");
    if (in_i1 && in_i4) return make(StabilityTag::Saddle, "k in I1 and I4");
    if (in_i3 && in_i2) return make(StabilityTag::Saddle, "k in I3 and I2");
    return make(StabilityTag::Indeterminate,
                in_i3 && in_i4 ? "k in I3 and I4: not covered by the closed-form cases"
                               : "k matches none of the interval cases");
}

StabilityClass classify_e2_theorem(const PairParams& p, double tol, SaddleThreshold threshold) {
    if (!interior_equilibrium(p)) {
        throw PreconditionError("interior equilibrium e2 does not exist: requires r > 1 + k e^{x*}");
    }
    const InteriorConstants t = interior_constants(p);
    const double r = p.r();
    const double d = p.d();
    if (near(d, t.n, tol)) {
        return make(StabilityTag::Indeterminate, "d = N: hypothesis d > N fails");
    }
    if (d < t.n) {
        return make(StabilityTag::Indeterminate, "d < N = " + fmt(t.n) + ": hypothesis d > N fails");
    }
    const double m1 = threshold == SaddleThreshold::Derived ? t.m1 : t.m1_alt;
    const double r_flip = t.m2 / m1;
    const double r_unit = t.n2 / t.n1;
    const double kxe = (t.k1 - 1.0) * t.x_star;
    if (near(r, r_flip, tol)) {
        const double p_zero = 2.0 * t.k1 * t.k1 / kxe;
        const double p_two = 4.0 * t.k1 * t.k1 / kxe;
        if (near(r, p_zero, tol) || near(r, p_two, tol)) {
            return make(StabilityTag::Indeterminate,
                        "r = M2/M1 coincides with an excluded value (p = 0 or p = 2)");
        }
        return make(StabilityTag::NonHyperbolic, "d != N and r = M2/M1");
    }
    if (near(r, r_unit, tol)) {
        return make(StabilityTag::Indeterminate, "r = N2/N1 (q = 1): not covered by the closed-form cases");
    }
    if (r < r_flip) {
        return make(StabilityTag::Saddle, "d > N and k1 < r < M2/M1 = " + fmt(r_flip));
    }
    if (r < r_unit) {
        return make(StabilityTag::Sink, "d > N and r in S = (" + fmt(std::max(t.k1, r_flip)) + ", " +
                                            fmt(r_unit) + ")");
    }
    return make(StabilityTag::Source, "d > N and r > max{M2/M1, N2/N1, k1}");
}

std::vector<EquilibriumReport> equilibria_pair(const PairParams& p, double tol) {
    std::vector<EquilibriumReport> out;

    EquilibriumReport e0;
    e0.name = "e0";
    e0.kind = EquilibriumKind::Trivial;
    e0.exists = true;
    e0.condition = "always";
    e0.class_theorem = classify_e0_theorem(p, tol);
    fill_pair_eigen(e0, p, tol);
    out.push_back(std::move(e0));

    EquilibriumReport e1;
    e1.name = "e1";
    e1.kind = EquilibriumKind::Boundary;
    e1.condition = "r > 1 + k";
    if (const auto pt = boundary_equilibrium(p)) {
        e1.point = *pt;
        e1.exists = true;
        e1.class_theorem = classify_e1_theorem(p, tol);
        fill_pair_eigen(e1, p, tol);
    }
    out.push_back(std::move(e1));

    EquilibriumReport e2;
    e2.name = "e2";
    e2.kind = EquilibriumKind::Interior;
    e2.condition = "r > 1 + k e^{(1+c)/d}";
    if (const auto pt = interior_equilibrium(p)) {
        e2.point = *pt;
        e2.exists = true;
        e2.class_theorem = classify_e2_theorem(p, tol);
        fill_pair_eigen(e2, p, tol);
    }
    out.push_back(std::move(e2));
    return out;
}

}  // namespace popdyn
