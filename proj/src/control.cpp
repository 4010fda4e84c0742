#include "popdyn/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "popdyn/errors.hpp"

namespace popdyn {

namespace {

// Smallest relaxation tried by the backtracking safeguard before the sweep
// gives up on an iteration.
constexpr double kMinRelaxation = 1e-8;

double sum_abs(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0, [](double acc, double e) { return acc + std::abs(e); });
}

// Partial derivatives of the controlled step t -> t+1.
struct StepPartials {
    double xx = 0.0, xy = 0.0, xh = 0.0;  // d x_{t+1} / d(x_t, y_t, h_t)
    double yx = 0.0, yy = 0.0;            // d y_{t+1} / d(x_t, y_t)
};

StepPartials partials(const ControlProblem& prob, const ControlledPath& path, double h, int t,
                      bool drop_predation) {
    const State& s = path.states[static_cast<std::size_t>(t)];
    StepPartials d;
    const auto ti = static_cast<std::size_t>(t);
    if (const auto* sp = std::get_if<SingleParams>(&prob.model)) {
        if (!path.prey_clamped[ti]) {
            d.xx = growth_derivative(sp->r(), sp->k(), s.x) - h;
            d.xh = -s.x;
        }
        return d;
    }
    const auto& pp = std::get<PairParams>(prob.model);
    if (!path.prey_clamped[ti]) {
        d.xx = growth_derivative(pp.r(), pp.k(), s.x) - h - (drop_predation ? 0.0 : pp.a() * s.y);
        d.xy = -pp.a() * s.x;
        d.xh = -s.x;
    }
    if (!path.predator_clamped[ti]) {
        d.yx = pp.d() * s.y;
        d.yy = -pp.c() + pp.d() * s.x;
    }
    return d;
}

std::vector<double> candidate_controls(const ControlProblem& prob, const ControlledPath& path,
                                       const Adjoints& adj) {
    std::vector<double> cand(static_cast<std::size_t>(prob.horizon));
    for (int t = 0; t < prob.horizon; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const double x = path.states[ti].x;
        const double lambda_next = adj.prey[ti + 1];
        if (prob.rewarded(t)) {
            cand[ti] = characterize_control(prob, x, lambda_next);
        } else {
            // Hamiltonian is linear in h here: bang-bang on the sign of -lambda x.
            cand[ti] = -lambda_next * x > 0.0 ? prob.h_max : 0.0;
        }
    }
    return cand;
}

}  // namespace

const char* to_string(AdjointMode m) {
    return m == AdjointMode::Consistent ? "consistent" : "paper-literal";
}

const char* to_string(ObjectiveRange r) {
    switch (r) {
        case ObjectiveRange::FullHorizon: return "full-horizon";
        case ObjectiveRange::SkipInitial: return "skip-initial";
        case ObjectiveRange::FirstTMinus1: return "first-T-minus-1";
    }
    return "?";
}

bool ControlProblem::rewarded(int t) const {
    switch (range) {
        case ObjectiveRange::FullHorizon: return t >= 0 && t < horizon;
        case ObjectiveRange::SkipInitial: return t >= 1 && t < horizon;
        case ObjectiveRange::FirstTMinus1: return t >= 0 && t < horizon - 1;
    }
    return false;
}

void ControlProblem::validate() const {
    if (horizon < 2) throw ArgumentError("control horizon T must be >= 2");
    if (!std::isfinite(c1) || c1 < 0.0) throw ArgumentError("c1 must be finite and >= 0");
    if (!std::isfinite(c2) || !(c2 > 0.0)) throw ArgumentError("c2 must be finite and > 0");
    if (!(h_max > 0.0 && h_max < 1.0)) throw ArgumentError("h_max must lie in (0, 1)");
    if (const auto* sp = std::get_if<SingleParams>(&model); sp && sp->h() != 0.0) {
        throw ArgumentError("single-species control problem takes its harvest from the controls; h must be 0");
    }
    const bool bad_x = !std::isfinite(initial.x) || initial.x < 0.0;
    const bool bad_y = two_species() && (!std::isfinite(initial.y) || initial.y < 0.0);
    if (bad_x || bad_y) throw ArgumentError("initial densities must be finite and >= 0");
}

void SweepConfig::validate() const {
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ArgumentError("relaxation must lie in (0, 1]");
    if (!(conv_tol > 0.0)) throw ArgumentError("conv_tol must be > 0");
    if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
}

void check_controls(const ControlProblem& prob, std::span<const double> controls) {
    if (controls.size() != static_cast<std::size_t>(prob.horizon)) {
        throw ArgumentError("expected " + std::to_string(prob.horizon) + " controls, got " +
                            std::to_string(controls.size()));
    }
    for (std::size_t t = 0; t < controls.size(); ++t) {
        const double h = controls[t];
        if (!(h >= 0.0 && h <= prob.h_max)) {
            throw ArgumentError("control h_" + std::to_string(t) + " outside [0, h_max]");
        }
    }
}

ControlledPath forward(const ControlProblem& prob, std::span<const double> controls) {
    check_controls(prob, controls);
    const auto steps = static_cast<std::size_t>(prob.horizon);
    ControlledPath path;
    path.states.reserve(steps + 1);
    path.prey_clamped.assign(steps, false);
    path.predator_clamped.assign(steps, false);
    State s = prob.initial;
    if (!prob.two_species()) s.y = 0.0;
    path.states.push_back(s);
    for (std::size_t t = 0; t < steps; ++t) {
        const double h = controls[t];
        State next;
        if (const auto* sp = std::get_if<SingleParams>(&prob.model)) {
            next.x = growth(sp->r(), sp->k(), s.x) - h * s.x;
        } else {
            const auto& pp = std::get<PairParams>(prob.model);
            next.x = growth(pp.r(), pp.k(), s.x) - pp.a() * s.y * s.x - h * s.x;
            next.y = -pp.c() * s.y + pp.d() * s.x * s.y;
        }
        if (next.x < 0.0) {
            next.x = 0.0;
            path.prey_clamped[t] = true;
        }
        if (next.y < 0.0) {
            next.y = 0.0;
            path.predator_clamped[t] = true;
        }
        s = next;
        path.states.push_back(s);
    }
    return path;
}

double objective(const ControlProblem& prob, std::span<const double> controls) {
    const ControlledPath path = forward(prob, controls);
    double j = 0.0;
    for (int t = 0; t < prob.horizon; ++t) {
        if (!prob.rewarded(t)) continue;
        const double h = controls[static_cast<std::size_t>(t)];
        j += prob.c1 * h * path.states[static_cast<std::size_t>(t)].x - prob.c2 * h * h;
    }
    return j;
}

std::vector<double> adjoint_sweep_single(const ControlProblem& prob, std::span<const double> controls,
                                         const ControlledPath& path) {
    if (prob.two_species()) throw ArgumentError("adjoint_sweep_single needs a single-species problem");
    check_controls(prob, controls);
    std::vector<double> lambda(static_cast<std::size_t>(prob.horizon) + 1, 0.0);
    for (int t = prob.horizon - 1; t >= 0; --t) {
        const auto ti = static_cast<std::size_t>(t);
        const double h = controls[ti];
        const StepPartials d = partials(prob, path, h, t, false);
        const double reward = prob.rewarded(t) ? prob.c1 * h : 0.0;
        lambda[ti] = reward + lambda[ti + 1] * d.xx;
    }
    return lambda;
}

Adjoints adjoint_sweep_pair(const ControlProblem& prob, std::span<const double> controls,
                            const ControlledPath& path) {
    if (!prob.two_species()) throw ArgumentError("adjoint_sweep_pair needs a prey-predator problem");
    check_controls(prob, controls);
    const bool drop = prob.adjoint_mode == AdjointMode::PaperLiteral;
    Adjoints adj;
    adj.prey.assign(static_cast<std::size_t>(prob.horizon) + 1, 0.0);
    adj.predator.assign(static_cast<std::size_t>(prob.horizon) + 1, 0.0);
    for (int t = prob.horizon - 1; t >= 0; --t) {
        const auto ti = static_cast<std::size_t>(t);
        const double h = controls[ti];
        const StepPartials d = partials(prob, path, h, t, drop);
        const double reward = prob.rewarded(t) ? prob.c1 * h : 0.0;
        const double l1 = adj.prey[ti + 1];
        const double l2 = adj.predator[ti + 1];
        adj.prey[ti] = reward + l1 * d.xx + l2 * d.yx;
        adj.predator[ti] = l1 * d.xy + l2 * d.yy;
    }
    return adj;
}

Adjoints adjoint_sweep(const ControlProblem& prob, std::span<const double> controls,
                       const ControlledPath& path) {
    if (prob.two_species()) return adjoint_sweep_pair(prob, controls, path);
    return {adjoint_sweep_single(prob, controls, path), {}};
}

std::vector<double> hamiltonian_gradient(const ControlProblem& prob, std::span<const double> controls) {
    const ControlledPath path = forward(prob, controls);
    const Adjoints adj = adjoint_sweep(prob, controls, path);
    std::vector<double> grad(static_cast<std::size_t>(prob.horizon));
    for (int t = 0; t < prob.horizon; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const double h = controls[ti];
        const double x = path.states[ti].x;
        const double reward = prob.rewarded(t) ? prob.c1 * x - 2.0 * prob.c2 * h : 0.0;
        const StepPartials d = partials(prob, path, h, t, false);
        grad[ti] = reward + adj.prey[ti + 1] * d.xh;
    }
    return grad;
}

double characterize_control(const ControlProblem& prob, double x_t, double lambda_next) {
    const double interior = x_t * (prob.c1 - lambda_next) / (2.0 * prob.c2);
    return std::clamp(interior, 0.0, prob.h_max);
}

ControlSolution solve_fbs(const ControlProblem& prob, const SweepConfig& cfg) {
    prob.validate();
    cfg.validate();
    const bool safeguarded = prob.adjoint_mode == AdjointMode::Consistent || !prob.two_species();

    ControlSolution sol;
    std::vector<double> h(static_cast<std::size_t>(prob.horizon), 0.0);
    double j = objective(prob, h);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        sol.iterations = it;
        const ControlledPath path = forward(prob, h);
        const Adjoints adj = adjoint_sweep(prob, h, path);
        const std::vector<double> cand = candidate_controls(prob, path, adj);

        double change = 0.0;
        for (std::size_t t = 0; t < h.size(); ++t) change += std::abs(cand[t] - h[t]);
        if (cfg.conv_tol * sum_abs(cand) - change >= 0.0) {
            sol.converged = true;
            break;
        }

        // Relaxed update. With exact adjoints cand - h is an ascent direction,
        // so the relaxation is halved until J does not decrease.
        double omega = cfg.relaxation;
        std::vector<double> next(h.size());
        double j_next = j;
        for (;;) {
            for (std::size_t t = 0; t < h.size(); ++t) next[t] = omega * cand[t] + (1.0 - omega) * h[t];
            j_next = objective(prob, next);
            if (!safeguarded || j_next >= j || omega < kMinRelaxation) break;
            omega *= 0.5;
        }
        if (safeguarded && j_next < j) break;  // stalled: no ascent along the sweep direction
        h = std::move(next);
        j = j_next;
    }

    const ControlledPath path = forward(prob, h);
    sol.adjoints = adjoint_sweep(prob, h, path);
    sol.states = path.states;
    sol.objective = objective(prob, h);
    sol.controls = std::move(h);
    return sol;
}

OracleResult brute_force_oracle(const ControlProblem& prob, int levels) {
    prob.validate();
    if (prob.horizon > kOracleMaxHorizon || levels > kOracleMaxLevels) {
        throw ArgumentError("brute-force budget exceeded: requires T <= " + std::to_string(kOracleMaxHorizon) +
                            " and levels <= " + std::to_string(kOracleMaxLevels));
    }
    if (levels < 2) throw ArgumentError("brute-force oracle needs at least 2 control levels");

    const auto n = static_cast<std::size_t>(prob.horizon);
    const double spacing = prob.h_max / static_cast<double>(levels - 1);
    const auto level_value = [&](int i) { return i == levels - 1 ? prob.h_max : spacing * i; };

    std::vector<int> idx(n, 0);
    std::vector<double> h(n, 0.0);
    std::vector<int> best_idx = idx;
    double best = objective(prob, h);
    for (;;) {
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (++idx[pos] < levels) break;
            idx[pos] = 0;
            if (pos == 0) {
                pos = n;
                break;
            }
        }
        if (pos == n) break;  // odometer wrapped
        for (std::size_t t = 0; t < n; ++t) h[t] = level_value(idx[t]);
        const double j = objective(prob, h);
        if (j > best) {
            best = j;
            best_idx = idx;
        }
    }

    OracleResult res;
    res.objective = best;
    res.controls.resize(n);
    for (std::size_t t = 0; t < n; ++t) res.controls[t] = level_value(best_idx[t]);
    double best_neighbour = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        for (int delta : {-1, 1}) {
            const int li = best_idx[t] + delta;
            if (li < 0 || li >= levels) continue;
            std::vector<double> nb = res.controls;
            nb[t] = level_value(li);
            best_neighbour = std::max(best_neighbour, objective(prob, nb));
        }
    }
    res.grid_gap = best - best_neighbour;
    return res;
}

}  // namespace popdyn
