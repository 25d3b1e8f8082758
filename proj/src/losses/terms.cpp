#include "elastipinn/losses/terms.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace elastipinn::loss {

std::string_view term_name(Term t) {
    switch (t) {
        case Term::Obs:
            return "obs";
        case Term::ObsE:
            return "obs_e";
        case Term::Pde:
            return "pde";
        case Term::BcN:
            return "bc_n";
        case Term::BcR:
            return "bc_r";
        case Term::Prior:
            return "prior";
        case Term::Tikhonov:
            return "tikhonov";
    }
    return "?";
}

Term term_from_name(std::string_view name) {
    for (Term t : kAllTerms)
        if (term_name(t) == name) return t;
    throw std::invalid_argument("unknown loss term '" + std::string(name) + "'");
}

double LossWeights::operator[](Term t) const { return const_cast<LossWeights&>(*this)[t]; }

double& LossWeights::operator[](Term t) {
    switch (t) {
        case Term::Obs:
            return obs;
        case Term::ObsE:
            return obs_e;
        case Term::Pde:
            return pde;
        case Term::BcN:
            return bc_n;
        case Term::BcR:
            return bc_r;
        case Term::Prior:
            return prior;
        case Term::Tikhonov:
            return tikhonov;
    }
    throw std::invalid_argument("unknown loss term");
}

void LossWeights::validate() const {
    for (Term t : kAllTerms) {
        const double w = (*this)[t];
        if (!std::isfinite(w) || w < 0.0)
            throw std::invalid_argument("loss weight '" + std::string(term_name(t)) + "' must be finite and >= 0");
    }
}

std::string_view pde_form_name(PdeForm f) { return f == PdeForm::Divergence ? "divergence" : "stress-norm"; }

PdeForm pde_form_from_name(std::string_view name) {
    if (name == "divergence") return PdeForm::Divergence;
    if (name == "stress-norm") return PdeForm::StressNorm;
    throw std::invalid_argument("unknown pde residual form '" + std::string(name) + "'");
}

void PriorSpec::validate() const {
    if (enabled && !(mu > 0.0 && std::isfinite(mu))) throw std::invalid_argument("prior mu must be > 0");
}

void LossBreakdown::set(Term t, double raw_value, double weight) {
    const auto i = static_cast<std::size_t>(term_index(t));
    raw[i] = raw_value;
    weighted[i] = weight * raw_value;
    computed[i] = true;
}

void LossBreakdown::finalize() {
    total = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i)
        if (computed[i]) total += weighted[i];
}

}  // namespace elastipinn::loss
