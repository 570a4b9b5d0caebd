#include "kdvlab/params.hpp"

#include "kdvlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kdvlab {

const char* to_string(Summability s) noexcept {
    switch (s) {
        case Summability::Finite: return "Finite";
        case Summability::LinfSummable: return "LinfSummable";
        case Summability::L1Summable: return "L1Summable";
    }
    return "Unknown";
}

TailRule TailRule::geometric(double ratio, double base) {
    TailRule r;
    r.kind = Kind::Geometric;
    r.ratio = ratio;
    r.base = base;
    r.check();
    return r;
}

TailRule TailRule::reciprocal(double power, double scale) {
    TailRule r;
    r.kind = Kind::Reciprocal;
    r.power = power;
    r.scale = scale;
    r.check();
    return r;
}

void TailRule::check() const {
    switch (kind) {
        case Kind::Explicit:
            return;
        case Kind::Geometric:
            if (!(ratio > 0.0 && ratio < 1.0))
                throw Error(ErrorKind::InvalidArgument, "geometric ratio must lie in (0, 1)");
            if (!(base > 0.0) || !std::isfinite(base))
                throw Error(ErrorKind::InvalidArgument, "geometric base must be positive");
            return;
        case Kind::Reciprocal:
            if (!(power > 1.0) || !std::isfinite(power))
                throw Error(ErrorKind::InvalidArgument, "reciprocal power must exceed 1");
            if (!(scale > 0.0) || !std::isfinite(scale))
                throw Error(ErrorKind::InvalidArgument, "reciprocal scale must be positive");
            return;
    }
}

double TailRule::kappa(std::size_t j) const {
    switch (kind) {
        case Kind::Geometric: return base * std::pow(ratio, static_cast<double>(j) - 1.0);
        case Kind::Reciprocal: return scale / std::pow(static_cast<double>(j), power);
        case Kind::Explicit: break;
    }
    throw Error(ErrorKind::InvalidArgument, "explicit rule has no generator");
}

double TailRule::power_sum_from(std::size_t from, double p) const {
    from = std::max<std::size_t>(from, 1);
    switch (kind) {
        case Kind::Explicit:
            return 0.0;
        case Kind::Geometric: {
            const double q = std::pow(ratio, p);
            return std::pow(kappa(from), p) / (1.0 - q);
        }
        case Kind::Reciprocal: {
            const double s = power * p;
            if (s <= 1.0) return std::numeric_limits<double>::infinity();
            const double sp = std::pow(scale, p);
            // sum_{j>=m} j^{-s} <= m^{-s} + (m^{1-s})/(s-1)
            const double m = static_cast<double>(from);
            return sp * (std::pow(m, -s) + std::pow(m, 1.0 - s) / (s - 1.0));
        }
    }
    return 0.0;
}

SolitonParams SolitonParams::finite(std::vector<double> kappas, std::vector<double> norming) {
    SolitonParams p;
    p.kappas = std::move(kappas);
    p.norming = std::move(norming);
    p.summability = Summability::Finite;
    p.tail = TailRule::explicit_list();
    return p;
}

namespace {

double prefix_sum(const SolitonParams& params, auto&& term) {
    double s = 0.0;
    // smallest terms first
    for (std::size_t i = params.size(); i-- > 0;) s += term(params.kappas[i], params.norming[i]);
    return s;
}

}  // namespace

ValidationReport validate(const SolitonParams& params) {
    ValidationReport rep;
    auto fail = [&](std::string msg) {
        rep.valid = false;
        rep.failures.push_back(std::move(msg));
    };

    if (params.kappas.size() != params.norming.size()) {
        fail("kappas and norming differ in length");
        return rep;
    }
    try {
        params.tail.check();
    } catch (const Error& e) {
        fail(e.what());
        return rep;
    }

    for (std::size_t i = 0; i < params.size(); ++i) {
        const double k = params.kappas[i];
        const double c = params.norming[i];
        if (!(k > 0.0) || !std::isfinite(k)) {
            std::ostringstream os;
            os << "kappa[" << i << "] is not a positive finite number";
            fail(os.str());
        }
        if (!(c > 0.0) || !std::isfinite(c)) {
            std::ostringstream os;
            os << "norming[" << i << "] is not a positive finite number";
            fail(os.str());
        }
    }
    if (!rep.valid) return rep;

    std::vector<double> sorted = params.kappas;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("duplicate kappa");

    const bool infinite = params.tail.infinite();
    rep.sup_kappa = sorted.empty() ? 0.0 : sorted.back();
    rep.sum_kappa = prefix_sum(params, [](double k, double) { return k; });
    rep.sum_c2_over_kappa = prefix_sum(params, [](double k, double c) { return c * c / k; });
    if (infinite) {
        // beyond the prefix c_j = kappa_j, so c^2/kappa = kappa
        const double tail = params.tail.power_sum_from(params.size() + 1, 1.0);
        rep.sum_kappa += tail;
        rep.sum_c2_over_kappa += tail;
        rep.sup_kappa = std::max(rep.sup_kappa, params.tail.kappa(params.size() + 1));
    }

    rep.linf_hypotheses = std::isfinite(rep.sup_kappa) && std::isfinite(rep.sum_c2_over_kappa);
    rep.l1_hypotheses = rep.linf_hypotheses && std::isfinite(rep.sum_kappa);

    if (!infinite) {
        rep.summability = Summability::Finite;
    } else if (rep.l1_hypotheses) {
        rep.summability = Summability::L1Summable;
    } else if (rep.linf_hypotheses) {
        rep.summability = Summability::LinfSummable;
    } else {
        fail("tail rule violates the summability hypotheses");
        return rep;
    }

    // Declared class must be implied by the data.
    switch (params.summability) {
        case Summability::Finite:
            if (infinite) fail("declared Finite but the tail rule is infinite");
            break;
        case Summability::LinfSummable:
            if (!rep.linf_hypotheses) fail("declared LinfSummable but hypotheses fail");
            break;
        case Summability::L1Summable:
            if (!rep.l1_hypotheses) fail("declared L1Summable but sum of kappa diverges");
            break;
    }
    return rep;
}

SolitonParams generate(const TailRule& rule, std::size_t count) {
    if (rule.kind == TailRule::Kind::Explicit)
        throw Error(ErrorKind::InvalidArgument, "explicit lists are built directly, not generated");
    rule.check();
    SolitonParams p;
    p.tail = rule;
    p.summability = Summability::L1Summable;
    p.kappas.reserve(count);
    for (std::size_t j = 1; j <= count; ++j) p.kappas.push_back(rule.kappa(j));
    p.norming = p.kappas;
    return p;
}

double evolved_norming(double c, double kappa, double t) {
    return c * std::exp(4.0 * kappa * kappa * kappa * t);
}

double kappa_power_tail(const SolitonParams& params, std::size_t from_index, double p) {
    from_index = std::max<std::size_t>(from_index, 1);
    double s = 0.0;
    for (std::size_t j = params.size(); j >= from_index && j >= 1; --j)
        s += std::pow(params.kappas[j - 1], p);
    if (params.tail.infinite())
        s += params.tail.power_sum_from(std::max(from_index, params.size() + 1), p);
    return s;
}

double tail_trace_bound(const SolitonParams& params, std::size_t from_index, double t, double x) {
    from_index = std::max<std::size_t>(from_index, 1);
    double s = 0.0;
    for (std::size_t j = params.size(); j >= from_index && j >= 1; --j) {
        const double k = params.kappas[j - 1];
        const double c = params.norming[j - 1];
        s += c * c / (2.0 * k) * std::exp(8.0 * k * k * k * t - 2.0 * k * x);
    }
    if (params.tail.infinite()) {
        const std::size_t first = std::max(from_index, params.size() + 1);
        const double kmax = params.tail.kappa(first);  // rules are decreasing
        const double envelope =
            std::exp(8.0 * kmax * kmax * kmax * std::max(t, 0.0) + 2.0 * kmax * std::max(-x, 0.0));
        const double rest = params.tail.power_sum_from(first, 1.0);
        if (!std::isfinite(rest))
            throw Error(ErrorKind::NotSummable, "trace tail diverges under the declared rule");
        s += 0.5 * rest * envelope;
    }
    return s;
}

std::size_t choose_N(const SolitonParams& params, double eps, const Window& window) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    const double t = window.t_max;
    const double x = window.x_min;
    const double limit = eps * (1.0 + 1e-12);
    for (std::size_t n = 0; n <= params.size(); ++n) {
        const double b = tail_trace_bound(params, n + 1, t, x);
        if (b <= limit) return n;
    }
    throw Error(ErrorKind::NotSummable,
                "no truncation within the stored prefix reaches the requested tail bound");
}

}  // namespace kdvlab
