// Copyright 2026 The diqkd authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Exact two-qubit state and measurement oracle.
 *
 * Builds the entangled target state and the readout ("dark state")
 * projectors, evaluates Born-rule joint outcome distributions, and provides
 * the visibility-based fidelity lower bound. Basis ordering is the z basis
 * (uu, ud, du, dd). Outcome encoding: 1 = atom present (projected onto the
 * dark state), 0 = ionized.
 */

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>

#include "diqkd/errors.hpp"

namespace diqkd::quantum {

using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector2c = Eigen::Vector2cd;

/// Readout polarization: angle gamma in degrees, relative phase phi in radians.
struct ReadoutSetting {
    double gamma_deg = 0.0;
    double phi_rad = 0.0;
};

inline void validate(const ReadoutSetting& s) {
    if (!(s.gamma_deg >= -90.0 && s.gamma_deg <= 90.0))
        throw DomainError("ReadoutSetting: gamma_deg outside [-90, 90]");
    if (!(s.phi_rad >= 0.0 && s.phi_rad < 2.0 * std::numbers::pi))
        throw DomainError("ReadoutSetting: phi_rad outside [0, 2pi)");
}

/// Two-qubit density matrix; visibility_tag records the mixing parameter
/// when the state was produced by werner().
struct TwoQubitState {
    Matrix4c rho = Matrix4c::Zero();
    std::optional<double> visibility_tag;
};

/**
 * Checks Hermiticity and unit trace to 1e-12 and positivity to -1e-10.
 * Throws DomainError on violation.
 */
inline void validate(const TwoQubitState& state) {
    constexpr double kMatrixTol = 1e-12;
    constexpr double kEigTol = -1e-10;
    if ((state.rho - state.rho.adjoint()).cwiseAbs().maxCoeff() > kMatrixTol)
        throw DomainError("TwoQubitState: not Hermitian");
    if (std::abs(state.rho.trace().real() - 1.0) > kMatrixTol ||
        std::abs(state.rho.trace().imag()) > kMatrixTol)
        throw DomainError("TwoQubitState: trace != 1");
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(state.rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kEigTol)
        throw DomainError("TwoQubitState: negative eigenvalue");
}

/**
 * Basis/sign calibration left implicit by the hardware. Bob's readout angle
 * enters as bob_angle_sign * beta plus a fixed quarter-turn offset of his
 * dark-state axis relative to Alice's. The defaults reproduce the measured
 * correlation structure E(alpha, beta) = -V cos 2(alpha - beta), i.e.
 * anti-correlated outputs for equal key settings.
 */
struct MeasurementConvention {
    int bob_angle_sign = -1;
    double bob_axis_offset_deg = 90.0;
};

inline void validate(const MeasurementConvention& conv) {
    if (conv.bob_angle_sign != 1 && conv.bob_angle_sign != -1)
        throw DomainError("MeasurementConvention: bob_angle_sign must be +1 or -1");
}

/// Joint probabilities p[a][b] of outputs a, b in {0, 1}.
struct OutcomeDistribution {
    double p[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

inline void validate(const OutcomeDistribution& d) {
    double sum = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            if (d.p[a][b] < 0.0) throw DomainError("OutcomeDistribution: negative probability");
            sum += d.p[a][b];
        }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("OutcomeDistribution: not normalized");
}

/// Correlation function E = p11 + p00 - p01 - p10.
inline double correlator(const OutcomeDistribution& d) {
    return d.p[1][1] + d.p[0][0] - d.p[0][1] - d.p[1][0];
}

/// Density matrix of (|ud> + |du>)/sqrt(2).
inline TwoQubitState psi_plus() {
    Eigen::Vector4cd v;
    v << 0.0, std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0, 0.0;
    TwoQubitState s;
    s.rho = v * v.adjoint();
    s.visibility_tag = 1.0;
    return s;
}

/// V |psi+><psi+| + (1-V) I/4.
inline TwoQubitState werner(double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("werner: V outside [0, 1]");
    TwoQubitState s;
    s.rho = v * psi_plus().rho + (1.0 - v) * 0.25 * Matrix4c::Identity();
    s.visibility_tag = v;
    return s;
}

/**
 * Rank-1 projector onto the dark state
 *   |D> = e^{i phi} cos(gamma) |up>_x - sin(gamma) |down>_x
 * expressed in the z basis.
 */
inline Matrix2c readout_projector(const ReadoutSetting& s) {
    validate(s);
    const double g = s.gamma_deg * std::numbers::pi / 180.0;
    const std::complex<double> phase(std::cos(s.phi_rad), std::sin(s.phi_rad));
    const std::complex<double> c = phase * std::cos(g);
    const double sn = std::sin(g);
    // |up>_x = (|up>_z + |down>_z)/sqrt2, |down>_x = (|up>_z - |down>_z)/sqrt2
    Vector2c d;
    d << (c - sn) / std::numbers::sqrt2, (c + sn) / std::numbers::sqrt2;
    return d * d.adjoint();
}

namespace detail {

/// Reduce an angle to the projector's fundamental domain [-90, 90].
inline double wrap_gamma_deg(double gamma) {
    while (gamma > 90.0) gamma -= 180.0;
    while (gamma < -90.0) gamma += 180.0;
    return gamma;
}

inline Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
    Matrix4c out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

} // namespace detail

/**
 * Born-rule joint outcome distribution for state rho measured with dark-state
 * projectors at settings sa (Alice) and sb (Bob), under the given convention.
 */
inline OutcomeDistribution joint_outcome_probs(const TwoQubitState& state,
                                               const ReadoutSetting& sa,
                                               const ReadoutSetting& sb,
                                               const MeasurementConvention& conv = {}) {
    validate(conv);
    const std::complex<double> tr = state.rho.trace();
    if (std::abs(tr - std::complex<double>(1.0, 0.0)) > 1e-9)
        throw DomainError("joint_outcome_probs: state is not normalized");

    ReadoutSetting sb_eff = sb;
    sb_eff.gamma_deg = detail::wrap_gamma_deg(conv.bob_angle_sign * sb.gamma_deg +
                                              conv.bob_axis_offset_deg);

    const Matrix2c pa1 = readout_projector(sa);
    const Matrix2c pb1 = readout_projector(sb_eff);
    const Matrix2c pa[2] = {Matrix2c::Identity() - pa1, pa1};
    const Matrix2c pb[2] = {Matrix2c::Identity() - pb1, pb1};

    OutcomeDistribution d;
    double sum = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const Matrix4c op = detail::kron(pa[a], pb[b]);
            double p = (op * state.rho).trace().real();
            if (p < 0.0 && p > -1e-12) p = 0.0;
            if (p < 0.0) throw NumericError("joint_outcome_probs: negative probability");
            d.p[a][b] = p;
            sum += p;
        }
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw NumericError("joint_outcome_probs: distribution does not sum to 1");
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) d.p[a][b] /= sum;
    return d;
}

/**
 * Fidelity lower bound relative to a maximally entangled state from measured
 * interference visibilities: F >= 1/6 + 5/6 * mean(vis). The extra 1/6 floor
 * accounts for population of a third spin level outside the qubit space.
 */
inline double fidelity_lower_bound(std::span<const double> visibilities) {
    if (visibilities.empty()) throw DomainError("fidelity_lower_bound: empty visibility list");
    double mean = 0.0;
    for (double v : visibilities) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("fidelity_lower_bound: visibility outside [0, 1]");
        mean += v;
    }
    mean /= static_cast<double>(visibilities.size());
    return 1.0 / 6.0 + 5.0 / 6.0 * mean;
}

} // namespace diqkd::quantum
