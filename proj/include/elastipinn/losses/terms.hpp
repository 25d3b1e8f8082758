#pragma once

#include <array>
#include <string>
#include <string_view>

namespace elastipinn::loss {

enum class Term { Obs, ObsE, Pde, BcN, BcR, Prior, Tikhonov };
inline constexpr int kTermCount = 7;
inline constexpr std::array<Term, kTermCount> kAllTerms{Term::Obs,  Term::ObsE,  Term::Pde,     Term::BcN,
                                                         Term::BcR, Term::Prior, Term::Tikhonov};

inline int term_index(Term t) { return static_cast<int>(t); }
std::string_view term_name(Term t);
Term term_from_name(std::string_view name);

using TermMask = std::array<bool, kTermCount>;
inline TermMask all_terms() { return {true, true, true, true, true, true, true}; }
inline TermMask no_terms() { return {}; }
inline TermMask only(std::initializer_list<Term> ts) {
    TermMask m{};
    for (Term t : ts) m[static_cast<std::size_t>(term_index(t))] = true;
    return m;
}

struct LossWeights {
    double obs = 1.0;
    double obs_e = 0.0;
    double pde = 1.0;
    double bc_n = 1.0;
    double bc_r = 1.0;
    double prior = 0.0;
    double tikhonov = 0.0;

    double operator[](Term t) const;
    double& operator[](Term t);
    // Throws std::invalid_argument on a negative or non-finite weight.
    void validate() const;
};

// Divergence: |div P + b|^2. StressNorm: |P|^2 at the collocation points.
enum class PdeForm { Divergence, StressNorm };
std::string_view pde_form_name(PdeForm f);
PdeForm pde_form_from_name(std::string_view name);

struct PriorSpec {
    bool enabled = false;
    double mu = 10.0;  // kPa
    void validate() const;
};

// One evaluation of the composite loss. Terms that were not evaluated keep
// computed[t] = false and zero values.
struct LossBreakdown {
    std::array<double, kTermCount> raw{};
    std::array<double, kTermCount> weighted{};
    TermMask computed{};
    double total = 0.0;
    long epoch = 0;
    std::string split = "train";

    double raw_of(Term t) const { return raw[static_cast<std::size_t>(term_index(t))]; }
    double weighted_of(Term t) const { return weighted[static_cast<std::size_t>(term_index(t))]; }
    bool has(Term t) const { return computed[static_cast<std::size_t>(term_index(t))]; }
    void set(Term t, double raw_value, double weight);
    // total = sum of the weighted computed terms in term order.
    void finalize();
};

}  // namespace elastipinn::loss
