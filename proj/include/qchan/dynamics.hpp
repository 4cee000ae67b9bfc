#pragma once

#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qchan/channel.hpp"

namespace qchan {

struct Trajectory {
    std::vector<ComplexMatrix> states; // states[k] = Phi^k(rho0), k = 0..steps
    std::size_t steps = 0;
    std::vector<std::string> warnings;
};

/// Repeated application of the channel. Non-state inputs are accepted with a
/// warning so operator trajectories can be followed too.
inline Trajectory iterate(const KrausChannel& ch, const ComplexMatrix& rho0, std::size_t steps)
{
    const Index n = ch.dim();
    if (rho0.rows() != n || rho0.cols() != n)
        throw ShapeError("iterate: initial state must be " + std::to_string(n) + "x" + std::to_string(n));
    Trajectory t;
    t.steps = steps;
    if ((rho0 - rho0.adjoint()).norm() > 1e-10)
        t.warnings.emplace_back("initial operator is not Hermitian");
    else {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho0, Eigen::EigenvaluesOnly);
        if (es.eigenvalues()(0) < -1e-10)
            t.warnings.emplace_back("initial operator is not positive semidefinite");
    }
    if (std::abs(rho0.trace() - 1.0) > 1e-10)
        t.warnings.emplace_back("initial operator does not have unit trace");

    t.states.reserve(steps + 1);
    t.states.push_back(rho0);
    for (std::size_t k = 0; k < steps; ++k)
        t.states.push_back(qchan::apply(ch, t.states.back()));
    return t;
}

struct Rational {
    long long p = 0;
    long long q = 1;
    bool operator==(const Rational&) const = default;
};

/// Last continued-fraction convergent of x with denominator at most max_den.
inline Rational best_rational(double x, long long max_den)
{
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        const double a_real = std::floor(r);
        if (a_real > 1e15)
            break;
        const auto a = static_cast<long long>(a_real);
        const long long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den)
            break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const double frac = r - a_real;
        if (frac < 1e-12)
            break;
        r = 1.0 / frac;
    }
    if (q1 == 0)
        return {0, 1};
    return {p1, q1};
}

struct CycleReport {
    std::optional<long long> period; // LCM of accepted denominators; empty if any eigenvalue failed
    std::vector<Complex> peripheral;
    std::vector<std::optional<Rational>> angles; // arg(lambda) / 2pi in [0, 1), when accepted
    std::vector<Complex> non_cyclic;
};

/// Identifies each peripheral eigenvalue as a root of unity e^{2 pi i p/q}
/// with q <= n^2 by continued fractions, accepting when |lambda^q - 1| < tol.
inline CycleReport detect_cycle(const KrausChannel& ch, double tol = 1e-6, double epsilon = 1e-6)
{
    const auto flags = validate(ch, 1e-8);
    if (!flags.trace_preserving && !flags.unital)
        throw PreconditionError("detect_cycle: channel is neither trace preserving nor unital");
    const Index n = ch.dim();
    const auto spec = spectrum(ch, epsilon);

    CycleReport out;
    out.peripheral = spec.peripheral;
    long long period = 1;
    bool all_cyclic = true;
    for (const auto& l : spec.peripheral) {
        double x = std::arg(l) / (2.0 * std::numbers::pi);
        if (x < 0)
            x += 1.0;
        Rational r = best_rational(x, n * n);
        r.p %= r.q;
        if (std::abs(std::pow(l, static_cast<double>(r.q)) - 1.0) < tol) {
            const long long g = std::gcd(r.p, r.q);
            r = {r.p / g, r.q / g};
            out.angles.emplace_back(r);
            period = std::lcm(period, r.q);
        } else {
            out.angles.emplace_back(std::nullopt);
            out.non_cyclic.push_back(l);
            all_cyclic = false;
        }
    }
    if (all_cyclic)
        out.period = period;
    return out;
}

inline constexpr double projector_check_tol = 1e-7;

/// Spectral projector of the superoperator onto its peripheral eigenvectors.
inline ComplexMatrix asymptotic_projector(const KrausChannel& ch, double epsilon = 1e-6)
{
    const auto spec = spectrum(ch, epsilon);
    const ComplexMatrix s = superoperator_matrix(ch);
    const auto clusters = linalg::cluster_eigenvalues(spec.peripheral, detail::cluster_radius);
    const ComplexMatrix p = linalg::invariant_projector(s, clusters, detail::eigenspace_tol);
    const double idem = (p * p - p).norm();
    const double comm = (s * p - p * s).norm();
    if (!(idem < projector_check_tol) || !(comm < projector_check_tol))
        throw NumericalFailure("asymptotic_projector: projector checks failed (|P^2 - P| = " + format_value(idem) +
                               ", |SP - PS| = " + format_value(comm) + ")");
    return p;
}

} // namespace qchan
