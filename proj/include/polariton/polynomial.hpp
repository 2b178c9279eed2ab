// Polynomial roots via companion-matrix eigenvalues with Newton polishing.
#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <span>
#include <vector>

#include "polariton/core.hpp"

namespace polariton::poly {

/// Horner evaluation of p(z) = c[0] + c[1] z + ... + c[n] z^n, with derivative.
template <typename T>
std::pair<T, T> eval_with_derivative(std::span<const double> coeffs, T z) {
    T p{0.0};
    T dp{0.0};
    for (std::size_t i = coeffs.size(); i-- > 0;) {
        dp = dp * z + p;
        p = p * z + coeffs[i];
    }
    return {p, dp};
}

template <typename T>
T eval(std::span<const double> coeffs, T z) {
    return eval_with_derivative(coeffs, z).first;
}

/// One Newton step; leaves z untouched if the derivative vanishes.
inline cplx newton_step(std::span<const double> coeffs, cplx z) {
    const auto [p, dp] = eval_with_derivative(coeffs, z);
    if (std::abs(dp) == 0.0) return z;
    const cplx z_new = z - p / dp;
    // Only accept steps that do not increase the residual.
    return std::abs(eval(coeffs, z_new)) <= std::abs(p) ? z_new : z;
}

/// All complex roots of a real polynomial given in ascending order.
/// The leading coefficient must be nonzero.
inline std::vector<cplx> roots(std::span<const double> coeffs, int polish_iterations = 1) {
    std::size_t degree = coeffs.size() - 1;
    if (coeffs.empty() || coeffs[degree] == 0.0)
        throw Error("poly::roots: leading coefficient is zero");
    if (degree == 0) return {};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree),
                                                      static_cast<Eigen::Index>(degree));
    const auto d = static_cast<Eigen::Index>(degree);
    for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < d; ++i)
        companion(i, d - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs[degree];

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw Error("poly::roots: eigenvalue iteration failed");

    std::vector<cplx> out;
    out.reserve(degree);
    for (Eigen::Index i = 0; i < d; ++i) {
        cplx z = solver.eigenvalues()[i];
        for (int it = 0; it < polish_iterations; ++it) z = newton_step(coeffs, z);
        out.push_back(z);
    }
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

}  // namespace polariton::poly
