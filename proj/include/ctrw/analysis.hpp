#ifndef CTRW_ANALYSIS_HPP
#define CTRW_ANALYSIS_HPP

// Linear stability analysis of network reaction-diffusion systems:
// system Jacobians, dispersion relations over the diffusion scale s,
// the linear pattern predictor, pattern classification, and zero modes.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "ctrw/dynamics.hpp"
#include "ctrw/eigen.hpp"
#include "ctrw/errors.hpp"
#include "ctrw/kinetics.hpp"
#include "ctrw/laplacian.hpp"
#include "ctrw/matrix.hpp"
#include "ctrw/network.hpp"

namespace ctrw {

namespace detail {

inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const unsigned nt = std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Reaction Jacobian DF at the model's homogeneous steady state (m x m).
inline Matrix reaction_jacobian_at_steady_state(const ReactionModel& model) {
    const std::vector<double> xs = model.steady_state();
    Matrix df;
    model.jacobian(xs, df);
    return df;
}

// Dense s*Lambda + DF(X*), an (mJ x mJ) matrix in the evolution orientation:
// block (p, q) is delta_pq * s * alpha_p * E + DF(p, q) * I with E = L^T.
inline Matrix assemble_system_jacobian(const LaplacianMatrix& laplacian, const ReactionModel& model,
                                       std::span<const double> alphas, double s) {
    const std::size_t n = laplacian.size();
    const std::size_t m = static_cast<std::size_t>(model.species());
    if (alphas.size() != m)
        throw InvalidParameterError("assemble_system_jacobian: one alpha per species required");
    const Matrix df = reaction_jacobian_at_steady_state(model);
    Matrix sys(m * n, m * n);
    for (std::size_t p = 0; p < m; ++p) {
        const double c = s * alphas[p];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                sys(p * n + i, p * n + j) = c * laplacian.entries()(j, i);
        for (std::size_t q = 0; q < m; ++q) {
            const double d = df(p, q);
            if (d == 0.0 && p != q) continue;
            for (std::size_t i = 0; i < n; ++i) sys(p * n + i, q * n + i) += d;
        }
    }
    return sys;
}

// Full spectrum of a dense real matrix (Hessenberg + shifted QR).
inline std::vector<std::complex<double>> eigen_spectrum(const Matrix& a) {
    return eigen_values(a);
}

inline bool reaction_stable(const ReactionModel& model) {
    const auto lams = eigen_values(reaction_jacobian_at_steady_state(model));
    for (const auto& lam : lams)
        if (!(lam.real() < 0.0)) return false;
    return true;
}

struct StabilityReport {
    double s = 1.0;
    std::vector<std::complex<double>> eigenvalues;  // descending real part
    std::complex<double> mu_star;
    std::vector<std::complex<double>> leading_eigenvector;
    bool reaction_stable = false;
    bool turing_unstable = false;
    // mu* coincides with another eigenvalue to pairing tolerance; eigenvector
    // may span a defective block, transient growth is not analyzed.
    bool repeated_leading = false;
};

inline StabilityReport stability_report(const LaplacianMatrix& laplacian, const ReactionModel& model,
                                        std::span<const double> alphas, double s) {
    StabilityReport rep;
    rep.s = s;
    const Matrix sys = assemble_system_jacobian(laplacian, model, alphas, s);
    EigenSystem es = eigen_system(sys);
    rep.eigenvalues = std::move(es.values);
    rep.mu_star = rep.eigenvalues.front();
    rep.leading_eigenvector = std::move(es.vectors.front());
    rep.reaction_stable = reaction_stable(model);
    rep.turing_unstable = rep.reaction_stable && rep.mu_star.real() > 0.0;
    double scale = 0.0;
    for (const auto& lam : rep.eigenvalues) scale = std::max(scale, std::abs(lam));
    for (std::size_t k = 1; k < rep.eigenvalues.size(); ++k)
        if (std::abs(rep.eigenvalues[k] - rep.mu_star) <= 1e-8 * std::max(1.0, scale))
            rep.repeated_leading = true;
    return rep;
}

// ---------------------------------------------------------------------------
// Dispersion relation over the scale parameter s.

struct DispersionCurve {
    std::vector<double> s;
    std::vector<double> re_mu_star;
    std::vector<double> critical_s;  // refined zero crossings, ascending
    std::optional<std::pair<double, double>> turing_window;
};

enum class DispersionMethod { automatic, full_spectrum, mode_decomposition };

struct DispersionOptions {
    DispersionMethod method = DispersionMethod::automatic;
    // automatic: full eigensolve per sample up to this system dimension,
    // the exact per-mode reduction beyond it.
    std::size_t full_method_dimension_cap = 256;
    double bisection_residual = 1e-8;  // target |Re mu*(s_c)|
    int max_bisection_steps = 200;
    int refinement_rounds = 12;  // continuity refinement near crossings
    unsigned threads = 0;        // 0 = hardware concurrency
};

inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw InvalidParameterError("log_grid: requires 0 < lo < hi and points >= 2");
    std::vector<double> g(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
    g.front() = lo;
    g.back() = hi;
    return g;
}

namespace detail {

// Largest real part over the union of per-mode blocks. Exact for any E:
// conjugating s*Lambda + DF by blockdiag(Q, ..., Q) with E = Q T Q^{-1}
// (complex Schur) and interleaving species turns the system into a block
// upper triangular matrix whose diagonal blocks are these m x m systems,
// one per eigenvalue of E.
inline double max_re_from_modes(const std::vector<std::complex<double>>& laplacian_modes,
                                const Matrix& df, std::span<const double> alphas, double s) {
    const std::size_t m = df.rows();
    double best = -std::numeric_limits<double>::infinity();
    if (m == 1) {
        for (const auto& mode : laplacian_modes)
            best = std::max(best, (s * alphas[0] * mode).real() + df(0, 0));
        return best;
    }
    if (m == 2) {
        for (const auto& mode : laplacian_modes) {
            const std::complex<double> a11 = s * alphas[0] * mode + df(0, 0);
            const std::complex<double> a22 = s * alphas[1] * mode + df(1, 1);
            const std::complex<double> tr = a11 + a22;
            const std::complex<double> det = a11 * a22 - df(0, 1) * df(1, 0);
            const std::complex<double> disc = std::sqrt(tr * tr - 4.0 * det);
            best = std::max({best, ((tr + disc) / 2.0).real(), ((tr - disc) / 2.0).real()});
        }
        return best;
    }
    throw InvalidParameterError("mode decomposition implemented for 1 or 2 species");
}

}  // namespace detail

inline DispersionCurve dispersion_relation(const LaplacianMatrix& laplacian,
                                           const ReactionModel& model,
                                           std::span<const double> alphas,
                                           std::span<const double> s_grid,
                                           DispersionOptions opt = {}) {
    if (s_grid.size() < 2) throw InvalidParameterError("dispersion_relation: need at least 2 samples");
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] >= 0.0)) throw InvalidParameterError("dispersion_relation: s must be >= 0");
        if (i && !(s_grid[i] > s_grid[i - 1]))
            throw InvalidParameterError("dispersion_relation: s grid must be strictly increasing");
    }
    const std::size_t m = static_cast<std::size_t>(model.species());
    if (alphas.size() != m)
        throw InvalidParameterError("dispersion_relation: one alpha per species required");

    const std::size_t dim = m * laplacian.size();
    DispersionMethod method = opt.method;
    if (method == DispersionMethod::automatic)
        method = dim <= opt.full_method_dimension_cap ? DispersionMethod::full_spectrum
                                                      : DispersionMethod::mode_decomposition;

    const Matrix df = reaction_jacobian_at_steady_state(model);
    std::vector<std::complex<double>> modes;
    if (method == DispersionMethod::mode_decomposition)
        modes = eigen_values(laplacian.evolution_operator());

    auto evaluate = [&](double s) -> double {
        try {
            if (method == DispersionMethod::mode_decomposition)
                return detail::max_re_from_modes(modes, df, alphas, s);
            const auto lams = eigen_values(assemble_system_jacobian(laplacian, model, alphas, s));
            double best = lams.front().real();
            for (const auto& lam : lams) best = std::max(best, lam.real());
            return best;
        } catch (const EigenSolverError& err) {
            throw EigenSolverError(std::string(err.what()) + " (at s = " + std::to_string(s) + ")");
        }
    };

    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    if (method == DispersionMethod::mode_decomposition) threads = 1;  // evaluation is already cheap

    DispersionCurve curve;
    curve.s.assign(s_grid.begin(), s_grid.end());
    curve.re_mu_star.assign(curve.s.size(), 0.0);
    detail::parallel_for(curve.s.size(), threads,
                         [&](std::size_t i) { curve.re_mu_star[i] = evaluate(curve.s[i]); });

    auto midpoint = [](double a, double b) {
        return (a > 0.0) ? std::sqrt(a * b) : 0.5 * (a + b);
    };

    // Refine sampling near sign changes until adjacent values step by less
    // than 10% of the curve's range there.
    for (int round = 0; round < opt.refinement_rounds; ++round) {
        double lo = curve.re_mu_star.front(), hi = lo;
        for (double v : curve.re_mu_star) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double range = hi - lo;
        if (range == 0.0) break;
        std::vector<double> inserts;
        for (std::size_t i = 0; i + 1 < curve.s.size(); ++i) {
            const bool sign_change = curve.re_mu_star[i] * curve.re_mu_star[i + 1] < 0.0;
            const bool near_crossing =
                sign_change ||
                std::min(std::abs(curve.re_mu_star[i]), std::abs(curve.re_mu_star[i + 1])) <
                    0.05 * range;
            if (!near_crossing) continue;
            if (std::abs(curve.re_mu_star[i + 1] - curve.re_mu_star[i]) <= 0.1 * range) continue;
            const double mid = midpoint(curve.s[i], curve.s[i + 1]);
            if (mid > curve.s[i] && mid < curve.s[i + 1]) inserts.push_back(mid);
        }
        if (inserts.empty()) break;
        std::vector<double> vals(inserts.size());
        detail::parallel_for(inserts.size(), threads, [&](std::size_t i) { vals[i] = evaluate(inserts[i]); });
        for (std::size_t i = 0; i < inserts.size(); ++i) {
            const auto pos = std::lower_bound(curve.s.begin(), curve.s.end(), inserts[i]);
            const std::size_t idx = static_cast<std::size_t>(pos - curve.s.begin());
            curve.s.insert(pos, inserts[i]);
            curve.re_mu_star.insert(curve.re_mu_star.begin() + static_cast<std::ptrdiff_t>(idx), vals[i]);
        }
    }

    // Bisection refinement of each sign change down to the residual target.
    for (std::size_t i = 0; i + 1 < curve.s.size(); ++i) {
        double a = curve.s[i], b = curve.s[i + 1];
        double fa = curve.re_mu_star[i], fb = curve.re_mu_star[i + 1];
        if (fa == 0.0) {
            curve.critical_s.push_back(a);
            continue;
        }
        if (fa * fb >= 0.0) continue;
        double best_s = std::abs(fa) < std::abs(fb) ? a : b;
        double best_f = std::min(std::abs(fa), std::abs(fb));
        for (int it = 0; it < opt.max_bisection_steps && best_f > opt.bisection_residual; ++it) {
            const double mid = midpoint(a, b);
            if (!(mid > a && mid < b)) break;
            const double fm = evaluate(mid);
            if (std::abs(fm) < best_f) {
                best_f = std::abs(fm);
                best_s = mid;
            }
            if (fa * fm <= 0.0) {
                b = mid;
                fb = fm;
            } else {
                a = mid;
                fa = fm;
            }
        }
        curve.critical_s.push_back(best_s);
    }
    std::sort(curve.critical_s.begin(), curve.critical_s.end());

    double peak = curve.re_mu_star.front();
    for (double v : curve.re_mu_star) peak = std::max(peak, v);
    if (curve.critical_s.size() >= 2 && peak > 0.0)
        curve.turing_window = std::make_pair(curve.critical_s.front(), curve.critical_s.back());
    return curve;
}

// ---------------------------------------------------------------------------
// Linear pattern predictor: delta = -(s Lambda + DF(X*))^{-1} s Lambda X*.

struct PredictorResult {
    std::vector<double> delta;      // mJ
    std::vector<double> predicted;  // X* replicated + delta
    double condition_estimate = 0.0;
    double residual_inf = 0.0;  // ||(s Lambda + DF) delta + s Lambda X*||_inf
};

inline PredictorResult linear_pattern_predictor(const LaplacianMatrix& laplacian,
                                                const ReactionModel& model,
                                                std::span<const double> alphas, double s,
                                                double condition_limit = 1e12) {
    const std::size_t n = laplacian.size();
    const std::size_t m = static_cast<std::size_t>(model.species());
    if (alphas.size() != m)
        throw InvalidParameterError("linear_pattern_predictor: one alpha per species required");
    const std::vector<double> xs = model.steady_state();

    // b = -s Lambda X*: per species, -(s alpha_p) * E * (x*_p 1).
    std::vector<double> b(m * n), ones(n), lap(n);
    for (std::size_t p = 0; p < m; ++p) {
        std::fill(ones.begin(), ones.end(), xs[p]);
        laplacian.apply_evolution(ones, lap);
        for (std::size_t j = 0; j < n; ++j) b[p * n + j] = -s * alphas[p] * lap[j];
    }

    const Matrix sys = assemble_system_jacobian(laplacian, model, alphas, s);
    LuSolver lu(sys);
    if (lu.singular())
        throw SingularSystemError("linear_pattern_predictor: s*Lambda + DF(X*) is singular");
    PredictorResult res;
    res.condition_estimate = sys.norm_one() * lu.inverse_norm_one_estimate();
    if (!(res.condition_estimate < condition_limit))
        throw SingularSystemError("linear_pattern_predictor: condition estimate " +
                                  std::to_string(res.condition_estimate) + " exceeds limit");

    res.delta = lu.solve(b);
    // One round of iterative refinement.
    std::vector<double> mx(m * n);
    sys.matvec(res.delta, mx);
    std::vector<double> r(m * n);
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - mx[i];
    const std::vector<double> corr = lu.solve(r);
    for (std::size_t i = 0; i < b.size(); ++i) res.delta[i] += corr[i];

    sys.matvec(res.delta, mx);
    double worst = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, std::abs(mx[i] - b[i]));
    res.residual_inf = worst;
    if (!(worst <= 1e-9 * (1.0 + norm_inf(b))))
        throw SingularSystemError("linear_pattern_predictor: solve residual too large");

    res.predicted.resize(m * n);
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t j = 0; j < n; ++j) res.predicted[p * n + j] = xs[p] + res.delta[p * n + j];
    return res;
}

// ---------------------------------------------------------------------------
// Zero mode of the evolution operator (the no-reaction steady state).

inline std::vector<double> zero_mode(const LaplacianMatrix& laplacian) {
    const std::size_t n = laplacian.size();
    const Matrix evo = laplacian.evolution_operator();
    EigenSystem es = eigen_system(evo);
    const double tol = 1e-10 * std::max(1.0, evo.norm_one());
    std::size_t zero_count = 0, zero_idx = 0;
    for (std::size_t k = 0; k < es.values.size(); ++k) {
        if (std::abs(es.values[k]) <= tol) {
            ++zero_count;
            zero_idx = k;
        }
    }
    if (zero_count != 1)
        throw SingularSystemError("zero_mode: zero eigenspace has dimension " +
                                  std::to_string(zero_count) + " (network disconnected?)");
    std::vector<double> v(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = es.vectors[zero_idx][i].real();
        sum += v[i];
    }
    if (std::abs(sum) < 1e-300) throw SingularSystemError("zero_mode: vector has zero sum");
    for (double& x : v) x /= sum;
    return v;
}

// ---------------------------------------------------------------------------
// Pattern classification.

enum class PatternClass { homogeneous, laplacian_pattern, turing_pattern };

inline const char* to_string(PatternClass c) {
    switch (c) {
        case PatternClass::homogeneous: return "Homogeneous";
        case PatternClass::laplacian_pattern: return "LaplacianPattern";
        case PatternClass::turing_pattern: return "TuringPattern";
    }
    return "?";
}

struct ClassifyOptions {
    double steady_tol = 1e-9;  // scale-aware: ||rhs|| < steady_tol * (1 + ||x||)
    double homogeneity_tol = 1e-6;
    double predictor_deviation_threshold = 0.1;
    std::optional<std::pair<double, double>> window;  // reuse a precomputed window
    std::vector<double> window_grid;                  // default: log_grid(1e-4, 1e2, 200)
    DispersionOptions dispersion;
};

struct Classification {
    PatternClass label = PatternClass::homogeneous;
    double s = 0.0;
    double homogeneity_rel_deviation = 0.0;
    double predictor_rel_distance = 0.0;
    std::optional<std::pair<double, double>> window;
    bool s_in_window = false;
};

inline Classification classify_pattern(const SystemState& steady, const LaplacianMatrix& laplacian,
                                       const ReactionModel& model, std::span<const double> alphas,
                                       double s, ClassifyOptions opt = {}) {
    const std::size_t n = laplacian.size();
    const std::size_t m = static_cast<std::size_t>(model.species());
    ReactionDiffusionSystem sys(laplacian, model,
                                std::vector<double>(alphas.begin(), alphas.end()), s);
    std::vector<double> deriv(m * n);
    sys.rhs(steady.x, deriv);
    if (!(norm_inf(deriv) < opt.steady_tol * (1.0 + norm_inf(steady.x))))
        throw InvalidParameterError("classify_pattern: input state is not steady");

    Classification result;
    result.s = s;

    double rel_dev = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += steady.x[p * n + j];
        mean /= static_cast<double>(n);
        double dev = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            dev = std::max(dev, std::abs(steady.x[p * n + j] - mean));
        rel_dev = std::max(rel_dev, dev / std::max(std::abs(mean), 1e-300));
    }
    result.homogeneity_rel_deviation = rel_dev;
    if (rel_dev < opt.homogeneity_tol) {
        result.label = PatternClass::homogeneous;
        return result;
    }

    if (opt.window) {
        result.window = opt.window;
    } else {
        std::vector<double> grid = opt.window_grid.empty() ? log_grid(1e-4, 1e2, 200) : opt.window_grid;
        const DispersionCurve curve = dispersion_relation(laplacian, model, alphas, grid, opt.dispersion);
        result.window = curve.turing_window;
    }
    result.s_in_window =
        result.window && s >= result.window->first && s <= result.window->second;

    const PredictorResult pred = linear_pattern_predictor(laplacian, model, alphas, s);
    double dist = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < pred.predicted.size(); ++i) {
        dist = std::max(dist, std::abs(steady.x[i] - pred.predicted[i]));
        scale = std::max(scale, std::abs(pred.predicted[i]));
    }
    result.predictor_rel_distance = dist / std::max(scale, 1e-300);

    result.label = (result.s_in_window &&
                    result.predictor_rel_distance > opt.predictor_deviation_threshold)
                       ? PatternClass::turing_pattern
                       : PatternClass::laplacian_pattern;
    return result;
}

// ---------------------------------------------------------------------------
// Two-means bimodality diagnostic per vertex-degree class.

struct TwoMeansSplit {
    double lower_mean = 0.0, upper_mean = 0.0;
    std::size_t lower_count = 0, upper_count = 0;
    double separation = 0.0;
    double within_spread = 0.0;  // pooled standard deviation
    bool bimodal = false;        // separation > 4 * within_spread
};

inline TwoMeansSplit two_means_split(std::vector<double> values) {
    TwoMeansSplit out;
    const std::size_t n = values.size();
    if (n < 2) {
        if (n == 1) out.lower_mean = out.upper_mean = values[0];
        out.lower_count = n;
        return out;
    }
    std::sort(values.begin(), values.end());
    std::vector<double> prefix(n + 1, 0.0), prefix2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] + values[i];
        prefix2[i + 1] = prefix2[i] + values[i] * values[i];
    }
    auto sse = [&](std::size_t from, std::size_t to) {  // [from, to)
        const double cnt = static_cast<double>(to - from);
        const double sum = prefix[to] - prefix[from];
        const double sq = prefix2[to] - prefix2[from];
        return std::max(0.0, sq - sum * sum / cnt);
    };
    std::size_t best_k = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < n; ++k) {
        const double total = sse(0, k) + sse(k, n);
        if (total < best) {
            best = total;
            best_k = k;
        }
    }
    out.lower_count = best_k;
    out.upper_count = n - best_k;
    out.lower_mean = prefix[best_k] / static_cast<double>(best_k);
    out.upper_mean = (prefix[n] - prefix[best_k]) / static_cast<double>(n - best_k);
    out.separation = out.upper_mean - out.lower_mean;
    out.within_spread = std::sqrt(best / static_cast<double>(n));
    out.bimodal = out.within_spread > 0.0 ? out.separation > 4.0 * out.within_spread
                                          : out.separation > 0.0;
    return out;
}

struct DegreeClassSplit {
    int degree = 0;
    TwoMeansSplit split;
};

// Split diagnostics for every degree class present in the network, ascending
// by degree; `one_species` holds the pattern values of a single species.
inline std::vector<DegreeClassSplit> bimodality_by_degree(std::span<const double> one_species,
                                                          const Network& net) {
    if (one_species.size() != static_cast<std::size_t>(net.vertex_count()))
        throw InvalidParameterError("bimodality_by_degree: size mismatch");
    std::vector<int> degs = net.degrees();
    std::vector<int> unique_degs = degs;
    std::sort(unique_degs.begin(), unique_degs.end());
    unique_degs.erase(std::unique(unique_degs.begin(), unique_degs.end()), unique_degs.end());
    std::vector<DegreeClassSplit> out;
    for (int d : unique_degs) {
        std::vector<double> vals;
        for (std::size_t j = 0; j < degs.size(); ++j)
            if (degs[j] == d) vals.push_back(one_species[j]);
        out.push_back({d, two_means_split(std::move(vals))});
    }
    return out;
}

}  // namespace ctrw

#endif
