#pragma once

#include <cstdint>

#include "qdmux/random.hpp"

namespace qdmux {

enum class Polarization : std::uint8_t { H = 0, V = 1 };

inline Polarization orthogonal(Polarization p) {
    return p == Polarization::H ? Polarization::V : Polarization::H;
}

inline char pol_char(Polarization p) { return p == Polarization::H ? 'H' : 'V'; }

/// Physical parameters of the four-level dot (ground, H/V exciton, biexciton).
struct QdParameters {
    double t1_x = 175e-12;               ///< exciton lifetime, s
    double t1_xx = 120e-12;              ///< biexciton lifetime, s
    double fss = 7.0e-6;                 ///< fine-structure splitting, eV
    double sigma = 0.0;                  ///< spectral wandering std per photon, Hz
    double gamma = 0.0;                  ///< dephasing rate, Hz; <= 0 means 1/t1_x
    double prep_fidelity = 0.95;         ///< biexciton preparation probability at the pi pulse
    double stim_fidelity = 0.99;         ///< probability a stim event lands in the stim polarization
    double reexcitation_prob = 0.0;      ///< per-cycle chance of a spurious extra X photon

    double effective_gamma() const { return gamma > 0.0 ? gamma : 1.0 / t1_x; }

    void validate() const;  ///< throws ParameterError
};

/// Excitation pulse: area in units of pi, drive detuning, intensity FWHM.
struct PulseParameters {
    double area = 1.0;
    double detuning = 0.0;   ///< Hz from the TPE resonance
    double duration = 4e-12; ///< s

    void validate() const;
};

/// Biexciton preparation probability from the generalized Rabi formula
///   P = prep_fidelity * Omega^2/(Omega^2+Delta^2) * sin^2(sqrt(Omega^2+Delta^2)/2)
/// with Omega = area*pi and Delta = detuning * detuning_to_area.
/// detuning_to_area <= 0 selects the default scale 2*pi*duration, i.e. a
/// detuning of one pulse bandwidth detunes by about one rotation unit.
double prepare_biexciton_probability(const PulseParameters& pulse, const QdParameters& qd,
                                     double detuning_to_area = 0.0);

/// Stimulation efficiency vs. stim delay: an error-function turn-on whose
/// width is the cross-correlation of the two pulse envelopes, times the
/// biexciton survival exp(-max(dt,0)/t1_xx). delta_t < 0 means the stim
/// pulse arrives before the excitation pulse.
double stim_efficiency(double delta_t, const PulseParameters& stim_pulse, const QdParameters& qd);

/// Polarization branch of the X photon. On stim success the stim
/// polarization wins with probability stim_fidelity; otherwise the decay
/// branches H/V with equal weight.
Polarization branch_polarization(bool stim_success, Polarization stim_pol, const QdParameters& qd,
                                 RandomSource& rng);

}  // namespace qdmux
