#pragma once

#include <variant>
#include <vector>

namespace popdyn {

/// Population state. Single-species models leave `y` at zero.
struct State {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const State&, const State&) = default;
};

/// Parameters of the general prey-predator map
///   x' = r x^m / (1 + k e^{b x})^n - a y x,   y' = y (-c + d x)
/// with the functional response fixed to h(x) = x.
class GeneralMapParams {
public:
    GeneralMapParams(double r, double k, double b, double m, double n,
                     double a, double c, double d);

    double r() const { return r_; }
    double k() const { return k_; }
    double b() const { return b_; }
    double m() const { return m_; }
    double n() const { return n_; }
    double a() const { return a_; }
    double c() const { return c_; }
    double d() const { return d_; }

private:
    double r_, k_, b_, m_, n_, a_, c_, d_;
};

/// Single-species map x' = r x / (1 + k e^x) - h x with constant harvest
/// intensity h in [0, 1).
class SingleParams {
public:
    SingleParams(double r, double k, double h = 0.0);

    double r() const { return r_; }
    double k() const { return k_; }
    double h() const { return h_; }

private:
    double r_, k_, h_;
};

/// Prey-predator map with b = m = n = 1.
class PairParams {
public:
    PairParams(double r, double k, double a, double c, double d);

    double r() const { return r_; }
    double k() const { return k_; }
    double a() const { return a_; }
    double c() const { return c_; }
    double d() const { return d_; }

    GeneralMapParams general() const { return {r_, k_, 1.0, 1.0, 1.0, a_, c_, d_}; }

private:
    double r_, k_, a_, c_, d_;
};

using Model = std::variant<SingleParams, PairParams, GeneralMapParams>;

/// Time-indexed states. `clamped` is set when any step produced a negative
/// component that was replaced by zero.
struct Trajectory {
    int t0 = 0;
    std::vector<State> states;
    bool clamped = false;
};

/// Result of one map evaluation before the caller discards the clamp flag.
struct StepOutcome {
    State state;
    bool clamped = false;
};

// Prey growth term g(x) = r x / (1 + k e^x) and its derivative. Both switch
// to an e^{-x} scaled form for large x so that e^x never overflows.
double growth(double r, double k, double x);
double growth_derivative(double r, double k, double x);

double step_single(const SingleParams& p, double x);
State step_pair(const PairParams& p, const State& s);
State step_general(const GeneralMapParams& p, const State& s);

StepOutcome step_outcome(const Model& model, const State& s);
State step(const Model& model, const State& s);

/// Iterates `model` for `horizon` steps. Throws ArgumentError when horizon < 1.
Trajectory simulate(const Model& model, const State& s0, int horizon);

bool is_two_species(const Model& model);

}  // namespace popdyn
