#include "qdmux/qd_model.hpp"

#include <cmath>
#include <string>

#include "qdmux/constants.hpp"
#include "qdmux/errors.hpp"

namespace qdmux {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void QdParameters::validate() const {
    require(t1_x > 0.0, "qd.t1_x must be > 0");
    require(t1_xx > 0.0, "qd.t1_xx must be > 0");
    require(fss >= 0.0, "qd.fss must be >= 0");
    require(sigma >= 0.0, "qd.sigma must be >= 0");
    require(effective_gamma() > 0.0, "qd.gamma must be > 0");
    require(is_probability(prep_fidelity), "qd.prep_fidelity must be in [0,1]");
    require(is_probability(stim_fidelity), "qd.stim_fidelity must be in [0,1]");
    require(is_probability(reexcitation_prob), "qd.reexcitation_prob must be in [0,1]");
}

void PulseParameters::validate() const {
    require(area >= 0.0, "pulse.area must be >= 0");
    require(duration > 0.0, "pulse.duration must be > 0");
    require(std::isfinite(detuning), "pulse.detuning must be finite");
}

double prepare_biexciton_probability(const PulseParameters& pulse, const QdParameters& qd,
                                     double detuning_to_area) {
    pulse.validate();
    qd.validate();
    if (pulse.area == 0.0) return 0.0;
    double scale = detuning_to_area > 0.0 ? detuning_to_area : 2.0 * kPi * pulse.duration;
    double omega = pulse.area * kPi;
    double delta = pulse.detuning * scale;
    double general = std::sqrt(omega * omega + delta * delta);
    double s = std::sin(general / 2.0);
    return qd.prep_fidelity * (omega * omega) / (general * general) * s * s;
}

double stim_efficiency(double delta_t, const PulseParameters& stim_pulse, const QdParameters& qd) {
    stim_pulse.validate();
    qd.validate();
    // Turn-on width: cross-correlation of two Gaussian intensity envelopes,
    // both taken at the stim pulse's FWHM.
    constexpr double kFwhmToSigma = 0.42466090014400953;  // 1/(2 sqrt(2 ln 2))
    double env_sigma = stim_pulse.duration * kFwhmToSigma;
    double width = std::sqrt(2.0) * env_sigma;
    double rise = 0.5 * std::erfc(-delta_t / (width * std::sqrt(2.0)));
    double survival = std::exp(-std::max(delta_t, 0.0) / qd.t1_xx);
    return rise * survival;
}

Polarization branch_polarization(bool stim_success, Polarization stim_pol, const QdParameters& qd,
                                 RandomSource& rng) {
    if (stim_success) {
        return rng.bernoulli(qd.stim_fidelity) ? stim_pol : orthogonal(stim_pol);
    }
    return rng.bernoulli(0.5) ? Polarization::H : Polarization::V;
}

}  // namespace qdmux
