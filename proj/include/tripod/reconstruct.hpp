#ifndef TRIPOD_RECONSTRUCT_HPP
#define TRIPOD_RECONSTRUCT_HPP

// Inverse problem of the measurement pipeline: bare populations -> dark-state
// amplitudes, and two state reconstructions -> the SU(2) operator
//   U = [[alpha, beta], [-conj(beta), conj(alpha)]],  |alpha|^2+|beta|^2 = 1.
//
// Population inversion for a normalized dark state d1|D1> + d2|D2>:
//   |d2|    = sqrt(3 P3 / 2)
//   cos phi = (P1 - P2) / sqrt(P3 (2 - 3 P3)),   phi = Arg(d2) - Arg(d1).
// Only cos phi is observable, so the sign of phi stays two-valued until it is
// resolved against a model prediction.

#include <array>
#include <cmath>
#include <string>

#include "tripod/errors.hpp"
#include "tripod/qmath.hpp"

namespace tripod {

struct DarkReconstruction {
    double d1_abs = 0.0;
    double d2_abs = 0.0;
    double phi = 0.0;            // in (-pi, pi]; magnitude only until resolved
    bool phi_defined = true;     // false at the poles |d2| in {0, 1}
    bool sign_resolved = false;
    bool clamped = false;        // inputs were pushed back into range
    double normalization_error = 0.0;  // |sum P - 1| before renormalization

    // Representative state with the first amplitude real positive.
    CVec2 state() const {
        return CVec2{{cplx(d1_abs, 0.0), d2_abs * std::exp(cplx(0.0, phi))}};
    }
};

// Invert measured bare populations. Populations are renormalized to sum 1
// (proportionally) before inversion; violations beyond eps are errors, and
// smaller ones are clamped with the flag set.
inline DarkReconstruction dark_from_populations(double p1, double p2, double p3,
                                                double eps = 0.02) {
    if (p1 < -eps || p2 < -eps || p3 < -eps)
        throw inconsistent_populations("dark_from_populations: negative population");
    const double sum = p1 + p2 + p3;
    if (std::abs(sum - 1.0) > eps)
        throw inconsistent_populations(
            "dark_from_populations: populations sum to " + std::to_string(sum));
    DarkReconstruction rec;
    rec.normalization_error = std::abs(sum - 1.0);
    p1 /= sum;
    p2 /= sum;
    p3 /= sum;
    if (p3 > 2.0 / 3.0 + eps)
        throw inconsistent_populations("dark_from_populations: P3 above 2/3");
    if (p3 > 2.0 / 3.0) {
        p3 = 2.0 / 3.0;
        rec.clamped = true;
    }
    if (p3 < 0.0) {
        p3 = 0.0;
        rec.clamped = true;
    }

    rec.d2_abs = std::sqrt(1.5 * p3);
    if (rec.d2_abs > 1.0) rec.d2_abs = 1.0;
    rec.d1_abs = std::sqrt(std::max(0.0, 1.0 - rec.d2_abs * rec.d2_abs));

    const double denom_sq = p3 * (2.0 - 3.0 * p3);
    if (denom_sq < 1e-12) {
        rec.phi_defined = false;  // pole state, relative phase unobservable
        rec.phi = 0.0;
        return rec;
    }
    double c = (p1 - p2) / std::sqrt(denom_sq);
    if (std::abs(c) > 1.0 + eps)
        throw inconsistent_populations("dark_from_populations: |cos phi| = " +
                                       std::to_string(std::abs(c)));
    if (std::abs(c) > 1.0) {
        c = (c > 0.0) ? 1.0 : -1.0;
        rec.clamped = true;
    }
    rec.phi = std::acos(c);  // [0, pi]; sign pending
    return rec;
}

// Pick the phi branch whose state overlaps the prediction best. Branches
// closer than 1e-6 in overlap leave the reconstruction unresolved (flag only).
inline DarkReconstruction sign_resolve(const DarkReconstruction& rec,
                                       const CVec2& predicted) {
    if (std::abs(norm(predicted) - 1.0) > 1e-6)
        throw invalid_input("sign_resolve: prediction must be normalized");
    DarkReconstruction out = rec;
    if (!rec.phi_defined) {
        out.sign_resolved = true;  // nothing to resolve at a pole
        return out;
    }
    auto overlap = [&](double phi) {
        const CVec2 s{{cplx(rec.d1_abs, 0.0), rec.d2_abs * std::exp(cplx(0.0, phi))}};
        return std::abs(inner(s, predicted));
    };
    const double op = overlap(rec.phi);
    const double om = overlap(-rec.phi);
    if (std::abs(op - om) < 1e-6) {
        out.sign_resolved = false;  // branches coincide or prediction is blind
        out.phi = rec.phi;
        return out;
    }
    out.phi = (op >= om) ? rec.phi : -rec.phi;
    out.sign_resolved = true;
    return out;
}

struct UnitaryFit {
    CMat2 U;
    double residual = 0.0;          // worst per-pair mismatch after phase alignment
    double unitarity_defect = 0.0;  // max|U^dag U - 1|, ~0 by construction
};

namespace detail {

inline double pair_residual(const CMat2& u, const CVec2& x, const CVec2& y) {
    // || U x - e^{i chi} y || minimized over chi
    const CVec2 ux = u * x;
    const cplx ov = inner(y, ux);
    const cplx ph = (std::abs(ov) > 1e-15) ? ov / std::abs(ov) : cplx(1.0, 0.0);
    double s = 0.0;
    for (int i = 0; i < 2; ++i) s += std::norm(ux[i] - ph * y[i]);
    return std::sqrt(s);
}

} // namespace detail

// Solve U x_k ~ e^{i chi_k} y_k for the two pairs. Writing the first-pair
// solution as a one-parameter family alpha = p l + q conj(l),
// beta = r l - s conj(l) with |l| = 1 (exactly unitary for any l), the second
// pair fixes l^2; the square root leaves the discrete branch that the
// prediction disambiguates.
inline UnitaryFit unitary_from_two_states(
    const CVec2& input1, const DarkReconstruction& rec1,
    const CVec2& input2, const DarkReconstruction& rec2,
    const CMat2& predicted, double residual_warn = 0.05) {
    if (!rec1.sign_resolved || !rec2.sign_resolved)
        throw invalid_input("unitary_from_two_states: reconstructions must be sign-resolved");
    const CVec2 x1 = normalized(input1);
    const CVec2 x2 = normalized(input2);
    // antipodal inputs: |<x1|x2>| = 0
    const double overlap = std::abs(inner(x1, x2));
    if (overlap < 0.05)
        throw invalid_input("unitary_from_two_states: input Bloch vectors are "
                            "(nearly) antipodal, system is ill-conditioned");
    const CVec2 y1 = rec1.state();
    const CVec2 y2 = rec2.state();

    const cplx p = std::conj(x1[0]) * y1[0];
    const cplx q = x1[1] * std::conj(y1[1]);
    const cplx r = std::conj(x1[1]) * y1[0];
    const cplx s = x1[0] * std::conj(y1[1]);

    const cplx F = p * x2[0] + r * x2[1];
    const cplx G = q * x2[0] - s * x2[1];
    const cplx H = std::conj(s) * x2[0] + std::conj(q) * x2[1];
    const cplx K = -std::conj(r) * x2[0] + std::conj(p) * x2[1];

    const cplx den = F * y2[1] - H * y2[0];
    const cplx num = G * y2[1] - K * y2[0];
    if (std::abs(den) < 1e-9)
        throw invalid_input("unitary_from_two_states: degenerate pair geometry");
    cplx l2 = -num / den;
    if (std::abs(l2) < 1e-12)
        throw invalid_input("unitary_from_two_states: degenerate pair geometry");
    l2 /= std::abs(l2);  // noise can push it off the unit circle

    UnitaryFit best;
    double best_dist = 1e300;
    const cplx root = std::sqrt(l2);
    for (const cplx l : {root, -root}) {
        const cplx alpha = p * l + q * std::conj(l);
        const cplx beta = r * l - s * std::conj(l);
        CMat2 u;
        u(0, 0) = alpha;
        u(0, 1) = beta;
        u(1, 0) = -std::conj(beta);
        u(1, 1) = std::conj(alpha);
        const double dist = max_abs_diff(u, predicted);
        if (dist < best_dist) {
            best_dist = dist;
            best.U = u;
        }
    }
    best.unitarity_defect = unitarity_defect(best.U);
    best.residual = std::max(detail::pair_residual(best.U, x1, y1),
                             detail::pair_residual(best.U, x2, y2));
    (void)residual_warn;  // residual is reported, never fatal
    return best;
}

} // namespace tripod

#endif
