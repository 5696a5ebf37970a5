#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairgf/graph.hpp"

namespace fairgf {

enum class FilterKind { Ppr, Hk, Custom };

constexpr std::size_t kDefaultTruncation = 20;
constexpr std::size_t kSpectrumGridPoints = 2001;

/// Truncated polynomial graph filter F(A_hat) = sum_{n=0..N} f_n A_hat^n.
/// The truncation is part of the filter definition, not an accuracy knob:
/// every consumer (baseline posteriors, surrogate propagation) must apply the
/// identical coefficient sequence.
struct FilterSpec {
    FilterKind kind = FilterKind::Custom;
    double param = 0.0;                  // a for ppr, t for hk
    std::vector<double> coefficients;    // f_0 .. f_N

    std::size_t truncation() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }

    /// Truncated polynomial value at lambda.
    double polynomial(double lambda) const;

    /// Spectral response of the filter. For ppr and hk this is the closed
    /// form of the full series ((1-a)/(1-a*lambda), e^{-t(1-lambda)}), which
    /// is what the eigenvalue-ratio diagnostics are stated against; for
    /// custom filters it falls back to the truncated polynomial.
    double spectrum(double lambda) const;

    /// Stable hash of (kind, param, coefficients); used to assert that the
    /// surrogate propagates with the exact filter that produced its
    /// reference posteriors.
    std::uint64_t fingerprint() const;
};

/// f_n = (1-a) a^n for a in (0,1). Throws outside the open interval.
FilterSpec ppr_coefficients(double a, std::size_t truncation = kDefaultTruncation);

/// f_n = e^{-t} t^n / n! for t > 0.
FilterSpec hk_coefficients(double t, std::size_t truncation = kDefaultTruncation);

FilterSpec custom_filter(std::vector<double> coefficients);

enum class PostProcessing { None, L1 };

struct FilterOutput {
    GraphSignal scores;
    double post_scale = 1.0;   // realized uniform post-processing value p
    bool zero_mass = false;    // L1 requested on an all-zero result
};

/// r = p (.) sum_n f_n A_hat^n q, computed by iterated spmv. With
/// PostProcessing::L1 the result is scaled to unit L1 norm; an all-zero
/// filtered signal is returned unscaled with zero_mass set instead of
/// erroring (isolated components can legally produce it).
FilterOutput apply_filter(const FilterSpec& f, const NormalizedGraph& g, const GraphSignal& q,
                          PostProcessing post = PostProcessing::None);

/// F(A_hat)^T g via iterated spmv_transpose. Equals apply_filter when the
/// normalization is symmetric.
GraphSignal apply_filter_transpose(const FilterSpec& f, const NormalizedGraph& g, const GraphSignal& q);

/// True iff the truncated polynomial is strictly positive on a uniform grid
/// over [-1, 1].
bool positive_definite_check(const FilterSpec& f, std::size_t grid_points = kSpectrumGridPoints);

/// min F / max F of the spectral response over a uniform grid on [-1, 1];
/// lower bound for lambda_1 / lambda_max of the filter. Throws if the
/// response is not strictly positive on the grid.
double eigenvalue_ratio_bound(const FilterSpec& f, std::size_t grid_points = kSpectrumGridPoints);

/// Parses config filter names: {ppr|hk}{param}{sym|col}, e.g. "ppr0.85sym".
struct NamedFilter {
    FilterSpec spec;
    Normalization mode = Normalization::Symmetric;
    std::string name;
};

NamedFilter parse_filter_name(const std::string& name);

}  // namespace fairgf
