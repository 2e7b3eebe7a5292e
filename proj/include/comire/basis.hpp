#pragma once

#include <span>
#include <vector>

namespace comire {

// Simplex-constrained coefficients of the dose-response function
// beta(x) = sum_j w_j psi_j(x).
class BetaWeights {
public:
    static constexpr double kSimplexTolerance = 1e-10;

    BetaWeights() = default;
    // Throws InvariantError when w is off the simplex by more than the tolerance.
    explicit BetaWeights(std::vector<double> w);

    std::span<const double> values() const { return w_; }
    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t j) const { return w_[j]; }

private:
    std::vector<double> w_;
};

// Monotone I-spline basis on [0, dose_max] plus one step basis that is zero on
// the observed dose range and one beyond it.
//
// The I-splines are suffix sums of the clamped B-spline basis of the given
// degree, I_j(x) = sum_{l >= j} B_l(x), which makes each of them a piecewise
// polynomial of that degree rising from 0 at x = 0 to 1 at x = dose_max. The
// suffix sum starting at the first B-spline is identically one and is
// skipped, and so is the suffix made of the last B-spline alone, so that
// `inner_knot_count + degree` functions remain once the step basis is
// appended (10 for cubic splines with 7 inner knots).
class SplineBasis {
public:
    SplineBasis(int degree, std::vector<double> inner_knots, double dose_max);

    int degree() const { return degree_; }
    std::span<const double> inner_knots() const { return inner_knots_; }
    double dose_min() const { return 0.0; }
    double dose_max() const { return dose_max_; }
    // Number of basis functions J, step basis included.
    std::size_t size() const { return ispline_count_ + 1; }
    // Index of the identically-zero (on [0, dose_max]) basis: always the last.
    std::size_t zero_index() const { return ispline_count_; }
    // Full clamped knot vector of the underlying B-splines.
    std::span<const double> knot_vector() const { return knots_; }

    // psi_1(x) .. psi_J(x). Throws DomainError for x < 0.
    std::vector<double> evaluate(double x) const;
    void evaluate_into(double x, std::span<double> out) const;

    // beta(x) = w . psi(x).
    double beta(const BetaWeights& w, double x) const;

private:
    int degree_;
    std::vector<double> inner_knots_;
    double dose_max_;
    std::vector<double> knots_;
    std::size_t bspline_count_;
    std::size_t ispline_count_;
};

// Equally spaced inner knots on [0, dose_max]. Throws ConfigError for a
// nonpositive range, degree < 1 or no inner knots.
SplineBasis build_basis(int inner_knot_count, double dose_max, int degree);

inline std::vector<double> eval_basis(const SplineBasis& basis, double x) {
    return basis.evaluate(x);
}

inline double eval_beta(const SplineBasis& basis, const BetaWeights& w, double x) {
    return basis.beta(w, x);
}

}  // namespace comire
