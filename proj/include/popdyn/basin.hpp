#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "popdyn/maps.hpp"

namespace popdyn {

/// A 1-D or 2-D map. For `dim == 1` only `State::x` is meaningful.
struct DynamicalMap {
    int dim = 1;
    std::function<State(const State&)> step;
};

DynamicalMap as_map(const Model& model);

/// Parameter of the quartic x' = s^2 x (1-x) (1 - s x + s x^2).
class PolyMapParams {
public:
    explicit PolyMapParams(double s);
    double s() const { return s_; }

private:
    double s_;
};

/// Evaluated exactly, without clamping.
double step_poly(const PolyMapParams& p, double x);
double derivative_poly(const PolyMapParams& p, double x);
DynamicalMap as_map(const PolyMapParams& p);

enum class PolyRoot { Trivial, Logistic, LowerPair, UpperPair };

struct PolyFixedPoint {
    double x = 0.0;
    PolyRoot origin = PolyRoot::Trivial;
};

/// All real fixed points of the quartic, ascending. The quartic is the
/// second iterate of the logistic map s x (1-x), so besides 0 it fixes the
/// logistic fixed point 1 - 1/s and, for s > 3, the two points
/// (1 + s -+ sqrt((s-1)^2 - 4)) / (2s). Coincident roots (s = 3) are merged.
std::vector<PolyFixedPoint> poly_fixed_points(const PolyMapParams& p);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
};

struct Box {
    Interval x;
    std::optional<Interval> y;

    int dim() const { return y ? 2 : 1; }
};

/// Damped Newton from a uniform grid of `seeds` starts per axis (1-D maps are
/// additionally bracketed by sign changes of f(x) - x and bisected). Returns
/// deduplicated fixed points in the box with residual below 1e-10.
std::vector<State> find_fixed_points(const DynamicalMap& map, const Box& box, int seeds = 64);

struct BasinConfig {
    Box box;
    int grid = 200;
    int burn_in = 2000;
    double conv_tol = 1e-6;
    double escape_bound = 1e8;
    double interior_margin = 1e-3;  // fraction of each axis length treated as the boundary band
    std::vector<State> probes;      // extra initial conditions appended after the grid

    void validate(int dim) const;
};

enum class SampleOutcome { Converged = 0, OtherAttractor = 1, Escaped = 2 };

const char* to_string(SampleOutcome o);

struct BasinSample {
    State x0;
    SampleOutcome outcome = SampleOutcome::OtherAttractor;
    int iterations = 0;  // entry time into the tolerance ball, escape time, or burn_in
    bool interior = false;
    State final_state;
};

enum class BasinVerdict { AlmostGasConsistent, Refuted, Inconclusive };

const char* to_string(BasinVerdict v);

struct BasinReport {
    State target;
    std::size_t n_samples = 0;
    std::size_t n_converged = 0;
    std::size_t n_other_attractor = 0;
    std::size_t n_escaped = 0;
    std::size_t n_interior = 0;
    double interior_coverage = 0.0;
    double interior_margin = 0.0;
    BasinVerdict verdict = BasinVerdict::Inconclusive;
    std::optional<BasinSample> witness;  // first interior sample that failed to converge
    bool gas_consistent = false;         // every sample, boundary included, converged
    std::vector<BasinSample> samples;    // grid order, then probes
};

/// Iterates one initial condition and classifies it against `target`.
BasinSample classify_sample(const DynamicalMap& map, const BasinConfig& cfg, const State& target,
                            const State& x0);

/// Throws PreconditionError unless `target` is a fixed point of `map` to 1e-8.
BasinReport basin_scan(const DynamicalMap& map, const BasinConfig& cfg, const State& target);

}  // namespace popdyn
