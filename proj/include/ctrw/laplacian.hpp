#ifndef CTRW_LAPLACIAN_HPP
#define CTRW_LAPLACIAN_HPP

// Random-walk network Laplacians with per-vertex jump rates.
//
// Entries follow the source-row / destination-column convention
//     L(i, j) = alpha(i) * lambda(j, i) - alpha(j) * delta_ij
// and concentrations evolve as du(j)/dt = sum_i L(i, j) u(i). That is the
// transpose of the common "L*u" layout; consumers must go through
// apply_evolution() or evolution_operator() instead of multiplying the raw
// entry matrix, and the convention is recorded on the type so downstream
// code can assert against silent transposition.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctrw/errors.hpp"
#include "ctrw/matrix.hpp"
#include "ctrw/network.hpp"

namespace ctrw {

enum class LaplacianVariant { general, case_a, case_b };

enum class IndexConvention { source_row_destination_column };

inline const char* to_string(LaplacianVariant v) {
    switch (v) {
        case LaplacianVariant::general: return "general";
        case LaplacianVariant::case_a: return "case_a";
        case LaplacianVariant::case_b: return "case_b";
    }
    return "?";
}

class LaplacianMatrix {
  public:
    LaplacianMatrix(Matrix entries, LaplacianVariant variant, std::vector<double> rates)
        : entries_(std::move(entries)), variant_(variant), rates_(std::move(rates)) {
        if (entries_.rows() != entries_.cols())
            throw InvalidParameterError("laplacian: entry matrix must be square");
    }

    std::size_t size() const { return entries_.rows(); }
    const Matrix& entries() const { return entries_; }
    LaplacianVariant variant() const { return variant_; }
    IndexConvention convention() const { return IndexConvention::source_row_destination_column; }

    // Per-vertex waiting-time rates alpha(w_j).
    const std::vector<double>& rates() const { return rates_; }

    // y_j = sum_i L(i, j) u_i
    void apply_evolution(std::span<const double> u, std::span<double> y) const {
        entries_.transpose_matvec(u, y);
    }

    std::vector<double> apply_evolution(std::span<const double> u) const {
        std::vector<double> y(size());
        apply_evolution(u, y);
        return y;
    }

    // Dense operator E with du/dt = E*u in the usual orientation (E = L^T).
    Matrix evolution_operator() const { return entries_.transposed(); }

    // Mass conservation: every source row of L must sum to zero.
    double max_row_sum_residual() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < size(); ++j) s += entries_(i, j);
            worst = std::max(worst, std::abs(s));
        }
        return worst;
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ParseError("cannot open for writing: " + path);
        char buf[32];
        for (std::size_t i = 0; i < size(); ++i) {
            for (std::size_t j = 0; j < size(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", entries_(i, j));
                out << (j ? "," : "") << buf;
            }
            out << "\n";
        }
    }

  private:
    Matrix entries_;
    LaplacianVariant variant_;
    std::vector<double> rates_;
};

// General family member from per-vertex rates and a normalized jump matrix.
// jump(i, j) is the probability of jumping from vertex i to vertex j; rows
// must sum to one and may be nonzero only along edges.
inline LaplacianMatrix build_general(const Network& net, std::span<const double> alpha,
                                     const Matrix& jump) {
    const std::size_t n = static_cast<std::size_t>(net.vertex_count());
    if (alpha.size() != n) throw InvalidParameterError("build_general: alpha size mismatch");
    if (jump.rows() != n || jump.cols() != n)
        throw InvalidParameterError("build_general: jump matrix dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(alpha[i] > 0.0)) throw InvalidParameterError("build_general: rates must be positive");
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double lam = jump(i, j);
            if (lam < 0.0) throw InvalidParameterError("build_general: negative jump probability");
            if (lam > 0.0 && !net.has_edge(static_cast<int>(i), static_cast<int>(j)))
                throw InvalidParameterError("build_general: jump probability on a non-edge");
            row += lam;
        }
        if (std::abs(row - 1.0) > 1e-12)
            throw InvalidParameterError("build_general: jump matrix row " + std::to_string(i) +
                                        " does not sum to 1");
    }
    Matrix L(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            L(i, j) = alpha[i] * jump(i, j) - (i == j ? alpha[j] : 0.0);
    return LaplacianMatrix(std::move(L), LaplacianVariant::general,
                           std::vector<double>(alpha.begin(), alpha.end()));
}

// Case A: identical waiting time everywhere, uniform jump along edges.
//     L(i, j) = alpha_A * (A(i, j) / k_i - delta_ij)
// Nonsymmetric unless the graph is regular.
inline LaplacianMatrix build_case_a(const Network& net, double alpha_a) {
    if (!(alpha_a > 0.0)) throw InvalidParameterError("build_case_a: alpha must be positive");
    const std::size_t n = static_cast<std::size_t>(net.vertex_count());
    Matrix L(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const int ki = net.degree(static_cast<int>(i));
        if (ki < 1) throw InvalidParameterError("build_case_a: zero-degree vertex");
        for (int j : net.neighbors(static_cast<int>(i)))
            L(i, static_cast<std::size_t>(j)) = alpha_a / static_cast<double>(ki);
        L(i, i) = -alpha_a;
    }
    return LaplacianMatrix(std::move(L), LaplacianVariant::case_a,
                           std::vector<double>(n, alpha_a));
}

// Case B: waiting rate proportional to degree; the standard graph Laplacian
//     L(i, j) = alpha_B * (A(i, j) - k_j * delta_ij)
// Always symmetric.
inline LaplacianMatrix build_case_b(const Network& net, double alpha_b) {
    if (!(alpha_b > 0.0)) throw InvalidParameterError("build_case_b: alpha must be positive");
    const std::size_t n = static_cast<std::size_t>(net.vertex_count());
    Matrix L(n, n);
    std::vector<double> rates(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int ki = net.degree(static_cast<int>(i));
        for (int j : net.neighbors(static_cast<int>(i)))
            L(i, static_cast<std::size_t>(j)) = alpha_b;
        L(i, i) = -alpha_b * static_cast<double>(ki);
        rates[i] = alpha_b * static_cast<double>(ki);
    }
    return LaplacianMatrix(std::move(L), LaplacianVariant::case_b, std::move(rates));
}

// Case B species rates rescaled by J / sum(k_j) so the network-mean waiting
// time matches a Case A run with the same base rates.
inline std::pair<double, double> case_b_rescaled_rates(const Network& net, double base_alpha_u,
                                                       double base_alpha_v) {
    const long ksum = net.degree_sum();
    if (net.vertex_count() < 2 || ksum <= 0)
        throw InvalidParameterError("case_b_rescaled_rates: degenerate network");
    const double factor = static_cast<double>(net.vertex_count()) / static_cast<double>(ksum);
    return {base_alpha_u * factor, base_alpha_v * factor};
}

}  // namespace ctrw

#endif
