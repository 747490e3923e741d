#ifndef CTRW_KINETICS_HPP
#define CTRW_KINETICS_HPP

// Per-vertex reaction kinetics: rates, analytic Jacobians, and homogeneous
// steady states. Models are immutable value objects; rate evaluation is pure.

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ctrw/errors.hpp"
#include "ctrw/matrix.hpp"

namespace ctrw {

class ReactionModel {
  public:
    virtual ~ReactionModel() = default;

    virtual int species() const = 0;
    virtual std::string name() const = 0;

    // True when trajectories must stay strictly positive (rates undefined
    // or meaningless otherwise).
    virtual bool requires_positive_state() const = 0;

    // f: R^m -> R^m at one vertex.
    virtual void rate(std::span<const double> x, std::span<double> out) const = 0;

    // Analytic Jacobian df_i/dx_j, written into an m-by-m matrix.
    virtual void jacobian(std::span<const double> x, Matrix& out) const = 0;

    virtual bool has_steady_state() const { return true; }

    // Homogeneous steady state x* with f(x*) = 0.
    virtual std::vector<double> steady_state() const = 0;
};

inline double steady_state_residual(const ReactionModel& model) {
    const std::vector<double> x = model.steady_state();
    std::vector<double> f(static_cast<std::size_t>(model.species()));
    model.rate(x, f);
    double worst = 0.0;
    for (double v : f) worst = std::max(worst, std::abs(v));
    return worst;
}

// Logistic growth f(u) = r u (1 - u); nonzero steady state u* = 1.
class LogisticModel final : public ReactionModel {
  public:
    explicit LogisticModel(double r) : r_(r) {
        if (!(r > 0.0)) throw InvalidParameterError("logistic: r must be positive");
    }

    int species() const override { return 1; }
    std::string name() const override { return "logistic"; }
    bool requires_positive_state() const override { return false; }

    void rate(std::span<const double> x, std::span<double> out) const override {
        out[0] = r_ * x[0] * (1.0 - x[0]);
    }

    void jacobian(std::span<const double> x, Matrix& out) const override {
        out = Matrix(1, 1);
        out(0, 0) = r_ * (1.0 - 2.0 * x[0]);
    }

    std::vector<double> steady_state() const override { return {1.0}; }

    double r() const { return r_; }

  private:
    double r_;
};

// Linear kinetics f(u) = a - b u with steady state a/b. The linearization of
// this model is exact, which makes it the reference case for the linear
// pattern predictor.
class LinearModel final : public ReactionModel {
  public:
    LinearModel(double a, double b) : a_(a), b_(b) {
        if (!(a > 0.0) || !(b > 0.0)) throw InvalidParameterError("linear: a, b must be positive");
    }

    int species() const override { return 1; }
    std::string name() const override { return "linear"; }
    bool requires_positive_state() const override { return false; }

    void rate(std::span<const double> x, std::span<double> out) const override {
        out[0] = a_ - b_ * x[0];
    }

    void jacobian(std::span<const double>, Matrix& out) const override {
        out = Matrix(1, 1);
        out(0, 0) = -b_;
    }

    std::vector<double> steady_state() const override { return {a_ / b_}; }

  private:
    double a_, b_;
};

struct GMParams {
    double c = 1.0;
    double rho = 1.0;
    double rho0 = 1.0;
    double mu = 5.0 / 256.0;
    double nu = 7.0 / 32.0;
    double c_d = 5.0 / 128.0;

    void validate() const {
        if (!(c > 0.0 && rho > 0.0 && rho0 > 0.0 && mu > 0.0 && nu > 0.0 && c_d > 0.0))
            throw InvalidParameterError("gierer-meinhardt: all parameters must be positive");
    }
};

// Gierer-Meinhardt activator(u)-inhibitor(v) kinetics:
//   f(u, v) = c rho u^2 / v - mu u + rho0 rho
//   g(u, v) = c_d rho u^2 - nu v
// valid only for v > 0. Closed-form steady state:
//   u* = (rho0 rho + c nu / c_d) / mu,   v* = c_d rho u*^2 / nu.
class GiererMeinhardtModel final : public ReactionModel {
  public:
    explicit GiererMeinhardtModel(GMParams p = {}) : p_(p) {
        p_.validate();
        u_star_ = (p_.rho0 * p_.rho + p_.c * p_.nu / p_.c_d) / p_.mu;
        v_star_ = p_.c_d * p_.rho * u_star_ * u_star_ / p_.nu;
        refine_steady_state();
    }

    int species() const override { return 2; }
    std::string name() const override { return "gierer_meinhardt"; }
    bool requires_positive_state() const override { return true; }

    void rate(std::span<const double> x, std::span<double> out) const override {
        const double u = x[0], v = x[1];
        if (!(v > 0.0)) throw DomainError("gierer-meinhardt: rate requires v > 0");
        out[0] = p_.c * p_.rho * u * u / v - p_.mu * u + p_.rho0 * p_.rho;
        out[1] = p_.c_d * p_.rho * u * u - p_.nu * v;
    }

    void jacobian(std::span<const double> x, Matrix& out) const override {
        const double u = x[0], v = x[1];
        if (!(v > 0.0)) throw DomainError("gierer-meinhardt: jacobian requires v > 0");
        out = Matrix(2, 2);
        out(0, 0) = 2.0 * p_.c * p_.rho * u / v - p_.mu;
        out(0, 1) = -p_.c * p_.rho * u * u / (v * v);
        out(1, 0) = 2.0 * p_.c_d * p_.rho * u;
        out(1, 1) = -p_.nu;
    }

    std::vector<double> steady_state() const override { return {u_star_, v_star_}; }

    const GMParams& params() const { return p_; }

  private:
    // The closed form is exact algebra, but v* picks up a couple of ulps of
    // rounding; nudge it to the neighboring double that minimizes the
    // residual so the stored state satisfies f(x*) ~ 0 to full precision.
    void refine_steady_state() {
        double best_v = v_star_;
        double best_res = residual_at(u_star_, v_star_);
        double lo = v_star_, hi = v_star_;
        for (int step = 0; step < 4; ++step) {
            lo = std::nextafter(lo, 0.0);
            hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
            for (double cand : {lo, hi}) {
                const double res = residual_at(u_star_, cand);
                if (res < best_res) {
                    best_res = res;
                    best_v = cand;
                }
            }
        }
        v_star_ = best_v;
    }

    double residual_at(double u, double v) const {
        double f[2];
        const double x[2] = {u, v};
        rate(std::span<const double>(x, 2), std::span<double>(f, 2));
        return std::max(std::abs(f[0]), std::abs(f[1]));
    }

    GMParams p_;
    double u_star_ = 0.0;
    double v_star_ = 0.0;
};

// Trivial kinetics f = 0 for pure-diffusion runs; has no steady state of its
// own (any homogeneous state is one).
class NoReactionModel final : public ReactionModel {
  public:
    explicit NoReactionModel(int species = 1) : m_(species) {
        if (species < 1) throw InvalidParameterError("no-reaction: species must be >= 1");
    }

    int species() const override { return m_; }
    std::string name() const override { return "none"; }
    bool requires_positive_state() const override { return false; }

    void rate(std::span<const double>, std::span<double> out) const override {
        for (double& v : out) v = 0.0;
    }

    void jacobian(std::span<const double>, Matrix& out) const override {
        out = Matrix(static_cast<std::size_t>(m_), static_cast<std::size_t>(m_));
    }

    bool has_steady_state() const override { return false; }

    std::vector<double> steady_state() const override {
        throw InvalidParameterError("no-reaction model defines no steady state");
    }

  private:
    int m_;
};

}  // namespace ctrw

#endif
