#ifndef CTRW_DYNAMICS_HPP
#define CTRW_DYNAMICS_HPP

// Assembly and time integration of the network reaction-diffusion equations
//     dX/dt = s * Lambda * X + F(X)
// with Lambda = blockdiag(alpha_1 E, ..., alpha_m E) and E the Laplacian
// evolution operator. State is species-major: u over all vertices, then v.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctrw/errors.hpp"
#include "ctrw/kinetics.hpp"
#include "ctrw/laplacian.hpp"
#include "ctrw/rng.hpp"

namespace ctrw {

struct SystemState {
    double t = 0.0;
    std::vector<double> x;
};

struct IntegratorConfig {
    enum class Method { rk4_fixed, rk45_adaptive };

    Method method = Method::rk45_adaptive;
    double dt = 1e-3;          // fixed step (rk4)
    double dt_init = 1e-4;     // first trial step (rk45)
    double dt_min = 1e-12;
    double dt_max = 1e2;
    double rtol = 1e-8;
    double atol = 1e-10;
    double t_max = 1e6;
    double steady_tol = 1e-9;  // stop when ||rhs||_inf < steady_tol * (1 + ||x||_inf)
    double s = 1.0;            // diffusion scale parameter
    std::uint64_t max_steps = 200'000'000ull;

    void validate() const {
        if (!(dt > 0.0) || !(dt_init > 0.0) || !(dt_min > 0.0) || !(dt_max >= dt_min))
            throw InvalidParameterError("integrator: step sizes must be positive");
        if (!(rtol > 0.0) || !(atol > 0.0) || !(steady_tol > 0.0))
            throw InvalidParameterError("integrator: tolerances must be positive");
        if (!(t_max > 0.0)) throw InvalidParameterError("integrator: t_max must be positive");
        if (!(s >= 0.0)) throw InvalidParameterError("integrator: s must be nonnegative");
    }
};

// Bundles the pieces of one reaction-diffusion system. Pure and immutable:
// safe to share across threads, one integration per thread.
class ReactionDiffusionSystem {
  public:
    ReactionDiffusionSystem(const LaplacianMatrix& laplacian, const ReactionModel& model,
                            std::vector<double> species_alphas, double s)
        : laplacian_(&laplacian), model_(&model), alphas_(std::move(species_alphas)), s_(s) {
        if (static_cast<int>(alphas_.size()) != model.species())
            throw InvalidParameterError("system: one alpha per species required");
        if (!(s >= 0.0)) throw InvalidParameterError("system: s must be nonnegative");
    }

    std::size_t vertex_count() const { return laplacian_->size(); }
    std::size_t dimension() const { return laplacian_->size() * alphas_.size(); }
    const LaplacianMatrix& laplacian() const { return *laplacian_; }
    const ReactionModel& model() const { return *model_; }
    std::span<const double> species_alphas() const { return alphas_; }
    double s() const { return s_; }

    // dxdt = s * Lambda * x + F(x). Domain errors from the kinetics propagate.
    void rhs(std::span<const double> x, std::span<double> dxdt) const {
        const std::size_t n = vertex_count();
        const int m = model_->species();
        if (x.size() != dimension() || dxdt.size() != dimension())
            throw InvalidParameterError("rhs: state dimension mismatch");
        for (int p = 0; p < m; ++p) {
            auto xp = x.subspan(static_cast<std::size_t>(p) * n, n);
            auto yp = dxdt.subspan(static_cast<std::size_t>(p) * n, n);
            laplacian_->apply_evolution(xp, yp);
            const double c = s_ * alphas_[static_cast<std::size_t>(p)];
            for (std::size_t j = 0; j < n; ++j) yp[j] *= c;
        }
        double xv[8], fv[8];
        for (std::size_t j = 0; j < n; ++j) {
            for (int p = 0; p < m; ++p) xv[p] = x[static_cast<std::size_t>(p) * n + j];
            model_->rate(std::span<const double>(xv, static_cast<std::size_t>(m)),
                         std::span<double>(fv, static_cast<std::size_t>(m)));
            for (int p = 0; p < m; ++p) dxdt[static_cast<std::size_t>(p) * n + j] += fv[p];
        }
    }

  private:
    const LaplacianMatrix* laplacian_;
    const ReactionModel* model_;
    std::vector<double> alphas_;
    double s_;
};

enum class TerminationReason { steady_state, t_max_reached };

struct IntegrationResult {
    SystemState state;
    TerminationReason reason = TerminationReason::t_max_reached;
    std::uint64_t accepted_steps = 0;
    std::uint64_t rejected_steps = 0;
    std::uint64_t rhs_evaluations = 0;
    double final_derivative_inf = 0.0;
};

using StateObserver = std::function<void(const SystemState&)>;

namespace detail {

inline bool all_positive(std::span<const double> x) {
    for (double v : x)
        if (!(v > 0.0)) return false;
    return true;
}

inline bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace detail

// Adaptive Dormand-Prince 5(4) with FSAL. Steps that throw a kinetics domain
// error, go non-finite, or (for positivity-constrained models) leave the
// positive orthant are rejected and retried with half the step.
inline IntegrationResult integrate_rk45(const ReactionDiffusionSystem& sys, SystemState state,
                                        const IntegratorConfig& cfg,
                                        const StateObserver& observer = {}) {
    cfg.validate();
    const std::size_t n = sys.dimension();
    if (state.x.size() != n) throw InvalidParameterError("integrate: state dimension mismatch");
    const bool positive = sys.model().requires_positive_state();
    if (positive && !detail::all_positive(state.x))
        throw InvalidParameterError("integrate: initial state must be strictly positive");

    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    IntegrationResult res;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

    auto eval = [&](std::span<const double> y, std::span<double> out) {
        sys.rhs(y, out);
        ++res.rhs_evaluations;
    };

    eval(state.x, k1);
    if (observer) observer(state);

    auto steady = [&](std::span<const double> deriv, std::span<const double> y) {
        return norm_inf(deriv) < cfg.steady_tol * (1.0 + norm_inf(y));
    };

    if (steady(k1, state.x)) {
        res.state = std::move(state);
        res.reason = TerminationReason::steady_state;
        res.final_derivative_inf = norm_inf(k1);
        return res;
    }

    double h = std::min(cfg.dt_init, cfg.t_max - state.t);
    bool just_rejected = false;

    while (state.t < cfg.t_max) {
        if (res.accepted_steps + res.rejected_steps > cfg.max_steps)
            throw IntegrationError("integrate: step budget exhausted");
        if (h < cfg.dt_min) throw IntegrationError("integrate: step size underflow at t = " +
                                                   std::to_string(state.t));
        h = std::min(h, cfg.t_max - state.t);

        bool step_ok = true;
        double err = 0.0;
        try {
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = state.x[i] + h * a21 * k1[i];
            eval(ytmp, k2);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = state.x[i] + h * (a31 * k1[i] + a32 * k2[i]);
            eval(ytmp, k3);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = state.x[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            eval(ytmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = state.x[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            eval(ytmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = state.x[i] +
                          h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            eval(ytmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = state.x[i] +
                          h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            eval(ynew, k7);

            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                       e6 * k6[i] + e7 * k7[i]);
                const double sc =
                    cfg.atol + cfg.rtol * std::max(std::abs(state.x[i]), std::abs(ynew[i]));
                acc += (ei / sc) * (ei / sc);
            }
            err = std::sqrt(acc / static_cast<double>(n));
            if (!std::isfinite(err) || !detail::all_finite(ynew)) step_ok = false;
            if (positive && !detail::all_positive(ynew)) step_ok = false;
        } catch (const DomainError&) {
            step_ok = false;  // a stage left the kinetics domain
        }

        if (!step_ok) {
            ++res.rejected_steps;
            just_rejected = true;
            h *= 0.5;
            continue;
        }

        if (err > 1.0) {
            ++res.rejected_steps;
            just_rejected = true;
            const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
            h *= fac;
            continue;
        }

        state.t += h;
        state.x.swap(ynew);
        k1.swap(k7);  // FSAL: derivative at the accepted state
        ++res.accepted_steps;
        if (observer) observer(state);

        if (steady(k1, state.x)) {
            res.reason = TerminationReason::steady_state;
            res.final_derivative_inf = norm_inf(k1);
            res.state = std::move(state);
            return res;
        }

        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        fac = std::min(just_rejected ? 1.0 : 5.0, std::max(0.2, fac));
        just_rejected = false;
        h = std::min(h * fac, cfg.dt_max);
    }

    res.reason = TerminationReason::t_max_reached;
    res.final_derivative_inf = norm_inf(k1);
    res.state = std::move(state);
    return res;
}

// Classic fixed-step RK4, kept for order-of-convergence checks.
inline IntegrationResult integrate_rk4(const ReactionDiffusionSystem& sys, SystemState state,
                                       const IntegratorConfig& cfg,
                                       const StateObserver& observer = {}) {
    cfg.validate();
    const std::size_t n = sys.dimension();
    if (state.x.size() != n) throw InvalidParameterError("integrate: state dimension mismatch");
    const bool positive = sys.model().requires_positive_state();

    IntegrationResult res;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), ytmp(n);
    auto eval = [&](std::span<const double> y, std::span<double> out) {
        sys.rhs(y, out);
        ++res.rhs_evaluations;
    };

    eval(state.x, k1);
    if (observer) observer(state);

    while (state.t < cfg.t_max) {
        if (res.accepted_steps > cfg.max_steps)
            throw IntegrationError("integrate: step budget exhausted");
        if (norm_inf(k1) < cfg.steady_tol * (1.0 + norm_inf(state.x))) {
            res.reason = TerminationReason::steady_state;
            res.final_derivative_inf = norm_inf(k1);
            res.state = std::move(state);
            return res;
        }
        const double h = std::min(cfg.dt, cfg.t_max - state.t);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = state.x[i] + 0.5 * h * k1[i];
        eval(ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = state.x[i] + 0.5 * h * k2[i];
        eval(ytmp, k3);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = state.x[i] + h * k3[i];
        eval(ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            state.x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        state.t += h;
        ++res.accepted_steps;
        if (!detail::all_finite(state.x)) throw IntegrationError("integrate: state went non-finite");
        if (positive && !detail::all_positive(state.x))
            throw IntegrationError("integrate: fixed-step integration left the positive orthant");
        eval(state.x, k1);
        if (observer) observer(state);
    }
    res.reason = TerminationReason::t_max_reached;
    res.final_derivative_inf = norm_inf(k1);
    res.state = std::move(state);
    return res;
}

inline IntegrationResult integrate(const ReactionDiffusionSystem& sys, SystemState state,
                                   const IntegratorConfig& cfg, const StateObserver& observer = {}) {
    return cfg.method == IntegratorConfig::Method::rk4_fixed
               ? integrate_rk4(sys, std::move(state), cfg, observer)
               : integrate_rk45(sys, std::move(state), cfg, observer);
}

// Homogeneous steady state with independent uniform relative noise in
// [-amplitude, +amplitude] per vertex and species. Draw order is
// species-major, matching the state layout.
inline SystemState perturbed_initial_state(const ReactionModel& model, int vertex_count,
                                           double amplitude, std::uint64_t rng_seed) {
    if (!(amplitude > 0.0) || amplitude > 0.1)
        throw InvalidParameterError("perturbed_initial_state: amplitude must lie in (0, 0.1]");
    if (vertex_count < 1) throw InvalidParameterError("perturbed_initial_state: empty network");
    const std::vector<double> xs = model.steady_state();
    RngStream rng = RngStream::stream(rng_seed, 1);
    SystemState state;
    state.x.resize(xs.size() * static_cast<std::size_t>(vertex_count));
    std::size_t idx = 0;
    for (double base : xs)
        for (int j = 0; j < vertex_count; ++j, ++idx)
            state.x[idx] = base * (1.0 + rng.uniform(-amplitude, amplitude));
    return state;
}

// Uniform state (every vertex at `value` for every species).
inline SystemState uniform_state(int species, int vertex_count, double value) {
    SystemState state;
    state.x.assign(static_cast<std::size_t>(species) * static_cast<std::size_t>(vertex_count), value);
    return state;
}

}  // namespace ctrw

#endif
