#include "popdyn/maps.hpp"

#include <cmath>
#include <string>
#include <type_traits>

#include "popdyn/errors.hpp"

namespace popdyn {

namespace {

// Above this exponent the growth terms are evaluated in e^{-x} scaled form.
constexpr double kLargeExponent = 50.0;

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw ArgumentError(std::string("parameter ") + name + " must be finite");
    }
}

void require_positive(double v, const char* name) {
    require_finite(v, name);
    if (!(v > 0.0)) {
        throw ArgumentError(std::string("parameter ") + name + " must be > 0");
    }
}

void require_nonnegative(double v, const char* name) {
    require_finite(v, name);
    if (v < 0.0) {
        throw ArgumentError(std::string("parameter ") + name + " must be >= 0");
    }
}

void require_density(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw DomainError(std::string("density ") + name + " is not finite");
    }
    if (v < 0.0) {
        throw DomainError(std::string("density ") + name + " is negative");
    }
}

double clamp_nonnegative(double v, bool& clamped) {
    if (v < 0.0) {
        clamped = true;
        return 0.0;
    }
    return v;
}

// r x^m / (1 + k e^{b x})^n for x >= 0.
double general_growth(const GeneralMapParams& p, double x) {
    if (x == 0.0) return 0.0;
    const double bx = p.b() * x;
    if (bx > kLargeExponent) {
        return p.r() * std::exp(p.m() * std::log(x) - p.n() * bx -
                                p.n() * std::log(std::exp(-bx) + p.k()));
    }
    return p.r() * std::pow(x, p.m()) / std::pow(1.0 + p.k() * std::exp(bx), p.n());
}

StepOutcome single_outcome(const SingleParams& p, double x) {
    require_density(x, "x");
    StepOutcome out;
    out.state.x = clamp_nonnegative(growth(p.r(), p.k(), x) - p.h() * x, out.clamped);
    return out;
}

StepOutcome pair_outcome(const PairParams& p, const State& s) {
    require_density(s.x, "x");
    require_density(s.y, "y");
    StepOutcome out;
    const double x = growth(p.r(), p.k(), s.x) - p.a() * s.y * s.x;
    const double y = -p.c() * s.y + p.d() * s.x * s.y;
    out.state.x = clamp_nonnegative(x, out.clamped);
    out.state.y = clamp_nonnegative(y, out.clamped);
    return out;
}

StepOutcome general_outcome(const GeneralMapParams& p, const State& s) {
    require_density(s.x, "x");
    require_density(s.y, "y");
    StepOutcome out;
    const double x = general_growth(p, s.x) - p.a() * s.y * s.x;
    const double y = -p.c() * s.y + p.d() * s.x * s.y;
    out.state.x = clamp_nonnegative(x, out.clamped);
    out.state.y = clamp_nonnegative(y, out.clamped);
    return out;
}

}  // namespace

GeneralMapParams::GeneralMapParams(double r, double k, double b, double m, double n,
                                   double a, double c, double d)
    : r_(r), k_(k), b_(b), m_(m), n_(n), a_(a), c_(c), d_(d) {
    require_positive(r, "r");
    require_positive(k, "k");
    require_positive(b, "b");
    require_positive(m, "m");
    require_positive(n, "n");
    require_nonnegative(a, "a");
    require_nonnegative(c, "c");
    require_nonnegative(d, "d");
}

SingleParams::SingleParams(double r, double k, double h) : r_(r), k_(k), h_(h) {
    require_positive(r, "r");
    require_positive(k, "k");
    require_nonnegative(h, "h");
    if (!(h < 1.0)) throw ArgumentError("parameter h must be < 1");
}

PairParams::PairParams(double r, double k, double a, double c, double d)
    : r_(r), k_(k), a_(a), c_(c), d_(d) {
    require_positive(r, "r");
    require_positive(k, "k");
    require_positive(a, "a");
    require_nonnegative(c, "c");
    require_positive(d, "d");
}

double growth(double r, double k, double x) {
    if (x > kLargeExponent) {
        const double em = std::exp(-x);
        return r * x * em / (em + k);
    }
    return r * x / (1.0 + k * std::exp(x));
}

double growth_derivative(double r, double k, double x) {
    if (x > kLargeExponent) {
        const double em = std::exp(-x);
        const double denom = em + k;
        return r * em * (em + k - x * k) / (denom * denom);
    }
    const double e = k * std::exp(x);
    const double denom = 1.0 + e;
    return (r + r * e - r * x * e) / (denom * denom);
}

double step_single(const SingleParams& p, double x) { return single_outcome(p, x).state.x; }

State step_pair(const PairParams& p, const State& s) { return pair_outcome(p, s).state; }

State step_general(const GeneralMapParams& p, const State& s) {
    return general_outcome(p, s).state;
}

StepOutcome step_outcome(const Model& model, const State& s) {
    return std::visit(
        [&](const auto& p) -> StepOutcome {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SingleParams>) {
                return single_outcome(p, s.x);
            } else if constexpr (std::is_same_v<P, PairParams>) {
                return pair_outcome(p, s);
            } else {
                return general_outcome(p, s);
            }
        },
        model);
}

State step(const Model& model, const State& s) { return step_outcome(model, s).state; }

Trajectory simulate(const Model& model, const State& s0, int horizon) {
    if (horizon < 1) throw ArgumentError("simulation horizon must be >= 1");
    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
    State s = s0;
    if (!is_two_species(model)) s.y = 0.0;
    traj.states.push_back(s);
    for (int t = 0; t < horizon; ++t) {
        const StepOutcome out = step_outcome(model, s);
        traj.clamped = traj.clamped || out.clamped;
        s = out.state;
        traj.states.push_back(s);
    }
    return traj;
}

bool is_two_species(const Model& model) { return !std::holds_alternative<SingleParams>(model); }

}  // namespace popdyn
