#include "fairgf/filter.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace fairgf {

double FilterSpec::polynomial(double lambda) const {
    // Horner evaluation of the truncated polynomial.
    double acc = 0.0;
    for (std::size_t i = coefficients.size(); i-- > 0;) {
        acc = acc * lambda + coefficients[i];
    }
    return acc;
}

double FilterSpec::spectrum(double lambda) const {
    switch (kind) {
        case FilterKind::Ppr:
            return (1.0 - param) / (1.0 - param * lambda);
        case FilterKind::Hk:
            return std::exp(-param * (1.0 - lambda));
        case FilterKind::Custom:
            return polynomial(lambda);
    }
    return polynomial(lambda);
}

std::uint64_t FilterSpec::fingerprint() const {
    auto mix = [](std::uint64_t h, std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    };
    auto bits = [](double x) {
        std::uint64_t u;
        std::memcpy(&u, &x, sizeof(u));
        return u;
    };
    std::uint64_t h = static_cast<std::uint64_t>(kind) + 1;
    h = mix(h, bits(param));
    for (double c : coefficients) h = mix(h, bits(c));
    return h;
}

FilterSpec ppr_coefficients(double a, std::size_t truncation) {
    if (!(a > 0.0 && a < 1.0)) {
        throw std::invalid_argument("ppr parameter must lie in (0, 1)");
    }
    FilterSpec f;
    f.kind = FilterKind::Ppr;
    f.param = a;
    f.coefficients.resize(truncation + 1);
    double power = 1.0;
    for (std::size_t n = 0; n <= truncation; ++n) {
        f.coefficients[n] = (1.0 - a) * power;
        power *= a;
    }
    return f;
}

FilterSpec hk_coefficients(double t, std::size_t truncation) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("hk parameter must be positive");
    }
    FilterSpec f;
    f.kind = FilterKind::Hk;
    f.param = t;
    f.coefficients.resize(truncation + 1);
    double term = std::exp(-t);  // e^{-t} t^n / n!, built up incrementally
    for (std::size_t n = 0; n <= truncation; ++n) {
        f.coefficients[n] = term;
        term *= t / static_cast<double>(n + 1);
    }
    return f;
}

FilterSpec custom_filter(std::vector<double> coefficients) {
    if (coefficients.empty()) {
        throw std::invalid_argument("custom filter needs at least one coefficient");
    }
    for (double c : coefficients) {
        if (!std::isfinite(c)) throw std::invalid_argument("custom filter coefficient not finite");
    }
    FilterSpec f;
    f.kind = FilterKind::Custom;
    f.coefficients = std::move(coefficients);
    return f;
}

FilterOutput apply_filter(const FilterSpec& f, const NormalizedGraph& g, const GraphSignal& q,
                          PostProcessing post) {
    if (q.size() != g.n) {
        throw std::invalid_argument("apply_filter: signal length does not match node count");
    }
    FilterOutput out;
    out.scores.assign(g.n, 0.0);
    GraphSignal power = q;  // A_hat^n q, running
    for (std::size_t v = 0; v < g.n; ++v) out.scores[v] = f.coefficients[0] * power[v];
    for (std::size_t n = 1; n < f.coefficients.size(); ++n) {
        power = spmv(g, power);
        const double fn = f.coefficients[n];
        for (std::size_t v = 0; v < g.n; ++v) out.scores[v] += fn * power[v];
    }
    if (post == PostProcessing::L1) {
        double mass = 0.0;
        for (double x : out.scores) mass += std::fabs(x);
        if (mass == 0.0) {
            out.zero_mass = true;
        } else {
            out.post_scale = 1.0 / mass;
            for (double& x : out.scores) x *= out.post_scale;
        }
    }
    return out;
}

GraphSignal apply_filter_transpose(const FilterSpec& f, const NormalizedGraph& g, const GraphSignal& q) {
    if (q.size() != g.n) {
        throw std::invalid_argument("apply_filter_transpose: signal length does not match node count");
    }
    GraphSignal acc(g.n, 0.0);
    GraphSignal power = q;
    for (std::size_t v = 0; v < g.n; ++v) acc[v] = f.coefficients[0] * power[v];
    for (std::size_t n = 1; n < f.coefficients.size(); ++n) {
        power = spmv_transpose(g, power);
        const double fn = f.coefficients[n];
        for (std::size_t v = 0; v < g.n; ++v) acc[v] += fn * power[v];
    }
    return acc;
}

namespace {

template <typename Eval>
std::pair<double, double> grid_extrema(Eval&& eval, std::size_t grid_points) {
    if (grid_points < 2) throw std::invalid_argument("grid needs at least 2 points");
    double lo = eval(-1.0), hi = lo;
    for (std::size_t i = 1; i < grid_points; ++i) {
        double lambda = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        double v = eval(lambda);
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    return {lo, hi};
}

}  // namespace

bool positive_definite_check(const FilterSpec& f, std::size_t grid_points) {
    auto [lo, hi] = grid_extrema([&f](double l) { return f.polynomial(l); }, grid_points);
    (void)hi;
    return lo > 0.0;
}

double eigenvalue_ratio_bound(const FilterSpec& f, std::size_t grid_points) {
    auto [lo, hi] = grid_extrema([&f](double l) { return f.spectrum(l); }, grid_points);
    if (!(lo > 0.0)) {
        throw std::domain_error("eigenvalue_ratio_bound requires a positive definite filter");
    }
    return lo / hi;
}

NamedFilter parse_filter_name(const std::string& name) {
    NamedFilter out;
    out.name = name;
    std::string rest;
    FilterKind kind;
    if (name.rfind("ppr", 0) == 0) {
        kind = FilterKind::Ppr;
        rest = name.substr(3);
    } else if (name.rfind("hk", 0) == 0) {
        kind = FilterKind::Hk;
        rest = name.substr(2);
    } else {
        throw std::invalid_argument("unknown filter name '" + name + "': expected {ppr|hk}{param}{sym|col}");
    }
    if (rest.size() >= 3 && rest.compare(rest.size() - 3, 3, "sym") == 0) {
        out.mode = Normalization::Symmetric;
        rest.erase(rest.size() - 3);
    } else if (rest.size() >= 3 && rest.compare(rest.size() - 3, 3, "col") == 0) {
        out.mode = Normalization::Column;
        rest.erase(rest.size() - 3);
    } else {
        throw std::invalid_argument("filter name '" + name + "' must end in 'sym' or 'col'");
    }
    std::size_t consumed = 0;
    double param;
    try {
        param = std::stod(rest, &consumed);
    } catch (const std::exception&) {
        throw std::invalid_argument("filter name '" + name + "' has no numeric parameter");
    }
    if (consumed != rest.size()) {
        throw std::invalid_argument("filter name '" + name + "' has a malformed parameter");
    }
    out.spec = (kind == FilterKind::Ppr) ? ppr_coefficients(param) : hk_coefficients(param);
    return out;
}

}  // namespace fairgf
