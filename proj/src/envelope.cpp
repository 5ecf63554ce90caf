#include "kbie/analysis.hpp"
#include "kbie/error.hpp"

#include <cmath>

namespace kbie {

void EnvelopeModel::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(C) || !positive(C_R)) throw DomainError("envelope: constants C and C_R must be positive");
    if (kind == Kind::smooth_worst_case && !positive(alpha))
        throw DomainError("envelope: worst-case model needs alpha > 0");
    if (n != 2 && n != 3) throw DomainError("envelope: ambient dimension must be 2 or 3");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("envelope: delta must be positive");
}

double cutoff_resolvent(double k, const EnvelopeModel& model) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("envelope: k must be positive");
    return model.kind == EnvelopeModel::Kind::nontrapping ? model.C_R / k : model.C_R * std::exp(model.alpha * k);
}

EnvelopeValue inverse_bound_envelope(double k, const EnvelopeModel& model,
                                     const std::optional<SpectrumReport>& spectrum) {
    model.validate();
    const double cavity = spectrum ? cavity_resolvent_factor(k, *spectrum) : 0.0;
    EnvelopeValue v;
    v.bound = model.C * k * k * (cutoff_resolvent(k, model) + cavity);
    v.polynomial = model.C * std::pow(k, 2.0 * model.n + 2.0 + model.delta);
    return v;
}

}  // namespace kbie
