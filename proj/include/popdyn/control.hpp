#pragma once

#include <span>
#include <variant>
#include <vector>

#include "popdyn/maps.hpp"

namespace popdyn {

/// Which adjoint recursion drives the sweep for the prey-predator problem.
/// Consistent differentiates the full controlled prey equation, including the
/// -a y x predation term; PaperLiteral drops that term from the prey adjoint.
/// The two coincide for the single-species problem and whenever a = 0.
enum class AdjointMode { Consistent, PaperLiteral };

/// Periods whose reward c1 h_t x_t - c2 h_t^2 enters the objective.
///   FullHorizon:  t = 0 .. T-1 (every period with a control).
///   SkipInitial:  t = 1 .. T-1.
///   FirstTMinus1: t = 0 .. T-2, i.e. T-1 periods starting at the initial
///                 state. This is the 1-based "t = 1 .. T-1" sum with x_1 the
///                 initial condition. Reproduces the reference
///                 constant-harvest table.
enum class ObjectiveRange { FullHorizon, SkipInitial, FirstTMinus1 };

const char* to_string(AdjointMode m);
const char* to_string(ObjectiveRange r);

struct ControlProblem {
    std::variant<SingleParams, PairParams> model = SingleParams(2.0, 1.0);  // SingleParams must carry h = 0
    State initial;
    int horizon = 80;
    double c1 = 0.1;
    double c2 = 0.01;
    double h_max = 0.9;
    AdjointMode adjoint_mode = AdjointMode::Consistent;
    ObjectiveRange range = ObjectiveRange::FullHorizon;

    bool two_species() const { return std::holds_alternative<PairParams>(model); }
    bool rewarded(int t) const;
    /// Throws ArgumentError on any violated invariant.
    void validate() const;
};

struct SweepConfig {
    double relaxation = 0.5;
    double conv_tol = 1e-3;
    int max_iters = 10000;

    void validate() const;
};

/// States of the controlled map. `prey_clamped[t]` (`predator_clamped[t]`)
/// records whether that component of the step t -> t+1 was cut off at zero;
/// its local derivatives are then zero.
struct ControlledPath {
    std::vector<State> states;  // T + 1 entries
    std::vector<bool> prey_clamped;
    std::vector<bool> predator_clamped;
};

struct Adjoints {
    std::vector<double> prey;      // lambda_1 (or lambda for one species), T + 1 entries
    std::vector<double> predator;  // lambda_2, empty for one species
};

struct ControlSolution {
    std::vector<double> controls;  // h_0 .. h_{T-1}
    std::vector<State> states;     // x_0 .. x_T
    Adjoints adjoints;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Throws ArgumentError unless controls has length T and every entry lies in [0, h_max].
void check_controls(const ControlProblem& prob, std::span<const double> controls);

ControlledPath forward(const ControlProblem& prob, std::span<const double> controls);

double objective(const ControlProblem& prob, std::span<const double> controls);

/// Backward recursion lambda_T = 0,
///   lambda_t = w_t c1 h_t + lambda_{t+1} (g'(x_t) - h_t)
/// with w_t = 1 on rewarded periods.
std::vector<double> adjoint_sweep_single(const ControlProblem& prob,
                                         std::span<const double> controls,
                                         const ControlledPath& path);

Adjoints adjoint_sweep_pair(const ControlProblem& prob, std::span<const double> controls,
                            const ControlledPath& path);

Adjoints adjoint_sweep(const ControlProblem& prob, std::span<const double> controls,
                       const ControlledPath& path);

/// dH_t/dh_t = w_t (c1 x_t - 2 c2 h_t) - lambda_{t+1} x_t for every t.
std::vector<double> hamiltonian_gradient(const ControlProblem& prob, std::span<const double> controls);

/// clamp(x_t (c1 - lambda_next) / (2 c2), 0, h_max).
double characterize_control(const ControlProblem& prob, double x_t, double lambda_next);

/// Forward-backward sweep from all-zero controls: simulate forward, sweep the
/// adjoints backward, characterize the candidate control and take a relaxed
/// step toward it. Stops when
///   conv_tol * sum|candidate| - sum|candidate - h| >= 0.
/// When the adjoints are exact (consistent mode, or one species) the
/// relaxation is halved while the step would lower J.
/// Non-convergence is reported through `converged`, never thrown.
ControlSolution solve_fbs(const ControlProblem& prob, const SweepConfig& cfg = {});

struct OracleResult {
    std::vector<double> controls;
    double objective = 0.0;
    double grid_gap = 0.0;  // optimum minus its best one-level neighbour
};

inline constexpr int kOracleMaxHorizon = 6;
inline constexpr int kOracleMaxLevels = 21;

/// Exhaustive search over {0, h_max/(levels-1), ..., h_max}^T. Ties go to the
/// lexicographically smallest tuple.
OracleResult brute_force_oracle(const ControlProblem& prob, int levels);

}  // namespace popdyn
