#include "popdyn/basin.hpp"

#include <algorithm>
#include <cmath>

#include "popdyn/errors.hpp"

namespace popdyn {

namespace {

constexpr double kFixedPointResidual = 1e-10;
constexpr double kTargetResidual = 1e-8;
constexpr double kDedupDistance = 1e-7;

double distance(const State& a, const State& b, int dim) {
    if (dim == 1) return std::abs(a.x - b.x);
    return std::hypot(a.x - b.x, a.y - b.y);
}

double residual(const DynamicalMap& map, const State& s) {
    const State f = map.step(s);
    if (map.dim == 1) return std::abs(f.x - s.x);
    return std::max(std::abs(f.x - s.x), std::abs(f.y - s.y));
}

std::optional<double> safe_residual(const DynamicalMap& map, const State& s) {
    try {
        const double r = residual(map, s);
        if (std::isfinite(r)) return r;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

bool in_box(const Box& box, const State& s, double slack) {
    const auto within = [slack](const Interval& iv, double v) {
        const double pad = slack * iv.length();
        return v >= iv.lo - pad && v <= iv.hi + pad;
    };
    if (!within(box.x, s.x)) return false;
    return !box.y || within(*box.y, s.y);
}

State project(const Box& box, State s) {
    s.x = std::clamp(s.x, box.x.lo, box.x.hi);
    if (box.y) s.y = std::clamp(s.y, box.y->lo, box.y->hi);
    return s;
}

double axis_value(const Interval& iv, int i, int n) {
    return iv.lo + iv.length() * static_cast<double>(i) / static_cast<double>(n - 1);
}

// g(v) = f(v) - v along one axis of a 1-D map.
std::optional<double> gap_1d(const DynamicalMap& map, double x) {
    try {
        const double g = map.step(State{x, 0.0}).x - x;
        if (std::isfinite(g)) return g;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

// Forward or backward difference step that stays inside [lo, hi].
double fd_step(double v, const Interval& iv) {
    const double h = 1e-7 * std::max(1.0, std::abs(v));
    return v + h <= iv.hi ? h : -h;
}

std::optional<State> newton_1d(const DynamicalMap& map, const Box& box, double x) {
    for (int it = 0; it < 100; ++it) {
        const auto g = gap_1d(map, x);
        if (!g) return std::nullopt;
        if (std::abs(*g) < kFixedPointResidual) return State{x, 0.0};
        const double h = fd_step(x, box.x);
        const auto gh = gap_1d(map, x + h);
        if (!gh) return std::nullopt;
        const double slope = (*gh - *g) / h;
        if (slope == 0.0 || !std::isfinite(slope)) return std::nullopt;
        double step = -*g / slope;
        double next = x;
        bool improved = false;
        for (int halving = 0; halving < 40; ++halving) {
            next = std::clamp(x + step, box.x.lo, box.x.hi);
            const auto gn = gap_1d(map, next);
            if (gn && std::abs(*gn) < std::abs(*g)) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) return std::nullopt;
        x = next;
    }
    return std::nullopt;
}

std::optional<double> bisect_1d(const DynamicalMap& map, double lo, double hi, double glo) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto gm = gap_1d(map, mid);
        if (!gm) return std::nullopt;
        if (*gm == 0.0) return mid;
        if ((*gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = *gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct Residual2 {
    double fx, fy;
    double norm() const { return std::max(std::abs(fx), std::abs(fy)); }
};

std::optional<Residual2> gap_2d(const DynamicalMap& map, const State& s) {
    try {
        const State f = map.step(s);
        Residual2 r{f.x - s.x, f.y - s.y};
        if (std::isfinite(r.fx) && std::isfinite(r.fy)) return r;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

std::optional<State> newton_2d(const DynamicalMap& map, const Box& box, State s) {
    for (int it = 0; it < 100; ++it) {
        const auto g = gap_2d(map, s);
        if (!g) return std::nullopt;
        if (g->norm() < kFixedPointResidual) return s;
        const double hx = fd_step(s.x, box.x);
        const double hy = fd_step(s.y, *box.y);
        const auto gx = gap_2d(map, State{s.x + hx, s.y});
        const auto gy = gap_2d(map, State{s.x, s.y + hy});
        if (!gx || !gy) return std::nullopt;
        const double j11 = (gx->fx - g->fx) / hx;
        const double j21 = (gx->fy - g->fy) / hx;
        const double j12 = (gy->fx - g->fx) / hy;
        const double j22 = (gy->fy - g->fy) / hy;
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
        double dx = -(j22 * g->fx - j12 * g->fy) / det;
        double dy = -(-j21 * g->fx + j11 * g->fy) / det;
        State next = s;
        bool improved = false;
        for (int halving = 0; halving < 40; ++halving) {
            next = project(box, State{s.x + dx, s.y + dy});
            const auto gn = gap_2d(map, next);
            if (gn && gn->norm() < g->norm()) {
                improved = true;
                break;
            }
            dx *= 0.5;
            dy *= 0.5;
        }
        if (!improved) return std::nullopt;
        s = next;
    }
    return std::nullopt;
}

void add_unique(std::vector<State>& out, const DynamicalMap& map, const State& s) {
    const auto r = safe_residual(map, s);
    if (!r || *r >= kFixedPointResidual) return;
    for (State& existing : out) {
        if (distance(existing, s, map.dim) < kDedupDistance) {
            if (*r < *safe_residual(map, existing)) existing = s;
            return;
        }
    }
    out.push_back(s);
}

}  // namespace

DynamicalMap as_map(const Model& model) {
    return {is_two_species(model) ? 2 : 1, [model](const State& s) { return step(model, s); }};
}

PolyMapParams::PolyMapParams(double s) : s_(s) {
    if (!std::isfinite(s) || !(s > 0.0)) throw ArgumentError("parameter s must be finite and > 0");
}

double step_poly(const PolyMapParams& p, double x) {
    const double s = p.s();
    return s * s * x * (1.0 - x) * (1.0 - s * x + s * x * x);
}

double derivative_poly(const PolyMapParams& p, double x) {
    // Chain rule through the logistic factorisation L(L(x)), L(u) = s u (1-u).
    const double s = p.s();
    const double inner = s * x * (1.0 - x);
    return s * (1.0 - 2.0 * inner) * s * (1.0 - 2.0 * x);
}

DynamicalMap as_map(const PolyMapParams& p) {
    return {1, [p](const State& s) { return State{step_poly(p, s.x), 0.0}; }};
}

std::vector<PolyFixedPoint> poly_fixed_points(const PolyMapParams& p) {
    const double s = p.s();
    std::vector<PolyFixedPoint> pts{{0.0, PolyRoot::Trivial}, {1.0 - 1.0 / s, PolyRoot::Logistic}};
    const double disc = (s - 1.0) * (s - 1.0) - 4.0;
    if (disc > 0.0) {
        const double root = std::sqrt(disc);
        pts.push_back({(1.0 + s - root) / (2.0 * s), PolyRoot::LowerPair});
        pts.push_back({(1.0 + s + root) / (2.0 * s), PolyRoot::UpperPair});
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    std::vector<PolyFixedPoint> out;
    for (const auto& pt : pts) {
        if (!out.empty() && std::abs(out.back().x - pt.x) < 1e-12) continue;
        out.push_back(pt);
    }
    return out;
}

std::vector<State> find_fixed_points(const DynamicalMap& map, const Box& box, int seeds) {
    if (!(box.x.length() > 0.0) || (box.y && !(box.y->length() > 0.0))) {
        throw ArgumentError("fixed-point search box is degenerate");
    }
    if (box.dim() != map.dim) throw ArgumentError("box dimension does not match the map");
    const int n = std::max(seeds, 2);
    std::vector<State> out;

    if (map.dim == 1) {
        std::optional<double> prev_gap;
        double prev_x = box.x.lo;
        for (int i = 0; i < n; ++i) {
            const double x = axis_value(box.x, i, n);
            const auto g = gap_1d(map, x);
            if (g && *g == 0.0) add_unique(out, map, State{x, 0.0});
            if (g && prev_gap && (*g < 0.0) != (*prev_gap < 0.0) && *prev_gap != 0.0 && *g != 0.0) {
                if (const auto root = bisect_1d(map, prev_x, x, *prev_gap)) {
                    const auto polished = newton_1d(map, box, *root);
                    add_unique(out, map, polished.value_or(State{*root, 0.0}));
                }
            }
            if (const auto root = newton_1d(map, box, x)) add_unique(out, map, *root);
            prev_gap = g;
            prev_x = x;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const State seed{axis_value(box.x, i, n), axis_value(*box.y, j, n)};
                if (const auto root = newton_2d(map, box, seed)) add_unique(out, map, *root);
            }
        }
    }

    std::erase_if(out, [&](const State& s) { return !in_box(box, s, 0.0); });
    std::sort(out.begin(), out.end(), [](const State& a, const State& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    return out;
}

void BasinConfig::validate(int dim) const {
    if (grid < 2) throw ArgumentError("basin grid must have at least 2 samples per axis");
    if (burn_in < 1) throw ArgumentError("basin burn_in must be >= 1");
    if (!(conv_tol > 0.0) || !(escape_bound > 0.0)) {
        throw ArgumentError("basin tolerances must be positive");
    }
    if (!(interior_margin >= 0.0) || !(interior_margin < 0.5)) {
        throw ArgumentError("basin interior_margin must lie in [0, 0.5)");
    }
    if (!(box.x.length() > 0.0) || (box.y && !(box.y->length() > 0.0))) {
        throw ArgumentError("basin box is degenerate");
    }
    if (box.dim() != dim) throw ArgumentError("basin box dimension does not match the map");
}

const char* to_string(SampleOutcome o) {
    switch (o) {
        case SampleOutcome::Converged: return "converged";
        case SampleOutcome::OtherAttractor: return "other";
        case SampleOutcome::Escaped: return "escaped";
    }
    return "?";
}

const char* to_string(BasinVerdict v) {
    switch (v) {
        case BasinVerdict::AlmostGasConsistent: return "almost-GAS-consistent";
        case BasinVerdict::Refuted: return "refuted";
        case BasinVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

BasinSample classify_sample(const DynamicalMap& map, const BasinConfig& cfg, const State& target,
                            const State& x0) {
    BasinSample sample;
    sample.x0 = x0;
    State s = x0;
    int entered = distance(s, target, map.dim) < cfg.conv_tol ? 0 : -1;
    for (int t = 1; t <= cfg.burn_in; ++t) {
        State next;
        try {
            next = map.step(s);
        } catch (const DomainError&) {
            sample.outcome = SampleOutcome::Escaped;
            sample.iterations = t;
            sample.final_state = s;
            return sample;
        }
        const bool finite = std::isfinite(next.x) && std::isfinite(next.y);
        if (!finite || std::abs(next.x) > cfg.escape_bound || std::abs(next.y) > cfg.escape_bound) {
            sample.outcome = SampleOutcome::Escaped;
            sample.iterations = t;
            sample.final_state = next;
            return sample;
        }
        const bool stationary = next == s;
        s = next;
        if (distance(s, target, map.dim) < cfg.conv_tol) {
            if (entered < 0) entered = t;
        } else {
            entered = -1;
        }
        if (stationary) break;
    }
    sample.final_state = s;
    if (entered >= 0) {
        sample.outcome = SampleOutcome::Converged;
        sample.iterations = entered;
    } else {
        sample.outcome = SampleOutcome::OtherAttractor;
        sample.iterations = cfg.burn_in;
    }
    return sample;
}

BasinReport basin_scan(const DynamicalMap& map, const BasinConfig& cfg, const State& target) {
    cfg.validate(map.dim);
    const auto r = safe_residual(map, target);
    if (!r || *r > kTargetResidual) {
        throw PreconditionError("basin target is not a fixed point of the map");
    }

    const auto interior = [&](const State& s) {
        const auto strictly_inside = [&](const Interval& iv, double v) {
            const double band = cfg.interior_margin * iv.length();
            return v > iv.lo + band && v < iv.hi - band;
        };
        return strictly_inside(cfg.box.x, s.x) && (!cfg.box.y || strictly_inside(*cfg.box.y, s.y));
    };

    std::vector<State> starts;
    if (map.dim == 1) {
        for (int i = 0; i < cfg.grid; ++i) starts.push_back({axis_value(cfg.box.x, i, cfg.grid), 0.0});
    } else {
        for (int i = 0; i < cfg.grid; ++i) {
            for (int j = 0; j < cfg.grid; ++j) {
                starts.push_back({axis_value(cfg.box.x, i, cfg.grid), axis_value(*cfg.box.y, j, cfg.grid)});
            }
        }
    }
    starts.insert(starts.end(), cfg.probes.begin(), cfg.probes.end());

    BasinReport rep;
    rep.target = target;
    rep.interior_margin = cfg.interior_margin;
    rep.samples.reserve(starts.size());
    std::size_t interior_converged = 0;
    for (const State& x0 : starts) {
        BasinSample sample = classify_sample(map, cfg, target, x0);
        sample.interior = interior(x0);
        switch (sample.outcome) {
            case SampleOutcome::Converged: ++rep.n_converged; break;
            case SampleOutcome::OtherAttractor: ++rep.n_other_attractor; break;
            case SampleOutcome::Escaped: ++rep.n_escaped; break;
        }
        if (sample.interior) {
            ++rep.n_interior;
            if (sample.outcome == SampleOutcome::Converged) {
                ++interior_converged;
            } else if (!rep.witness) {
                rep.witness = sample;
            }
        }
        rep.samples.push_back(sample);
    }
    rep.n_samples = rep.samples.size();
    rep.gas_consistent = rep.n_converged == rep.n_samples;
    if (rep.n_interior == 0) {
        rep.verdict = rep.gas_consistent ? BasinVerdict::AlmostGasConsistent : BasinVerdict::Inconclusive;
    } else {
        rep.interior_coverage = static_cast<double>(interior_converged) / static_cast<double>(rep.n_interior);
        rep.verdict = rep.witness ? BasinVerdict::Refuted : BasinVerdict::AlmostGasConsistent;
    }
    return rep;
}

}  // namespace popdyn
