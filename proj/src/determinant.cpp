#include "kdvlab/determinant.hpp"

#include "kdvlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kdvlab {

CauchyMatrix CauchyMatrix::build(const SolitonParams& params, std::size_t order, double t, double x) {
    if (order > params.size()) {
        std::ostringstream os;
        os << "truncation " << order << " exceeds stored prefix " << params.size();
        throw Error(ErrorKind::InvalidArgument, os.str());
    }
    if (!std::isfinite(t) || !std::isfinite(x))
        throw Error(ErrorKind::WindowExceeded, "evaluation point is not finite");

    const auto n = static_cast<Eigen::Index>(order);
    CauchyMatrix m;
    m.t_ = t;
    m.x_ = x;
    m.kappas_.resize(n);
    m.log_source_.resize(n);
    m.log_scale_.resize(n);
    m.scaled_source_.resize(n);
    Eigen::VectorXd inv_scale_sq(n);

    for (Eigen::Index j = 0; j < n; ++j) {
        const double k = params.kappas[static_cast<std::size_t>(j)];
        const double c = params.norming[static_cast<std::size_t>(j)];
        if (!(k > 0.0) || !(c > 0.0))
            throw Error(ErrorKind::InvalidParams, "kappa and norming constants must be positive");
        const double log_e = std::log(c) + 4.0 * k * k * k * t - k * x;
        if (!std::isfinite(log_e))
            throw Error(ErrorKind::WindowExceeded, "exponent of C is not representable");
        const double log_s = std::max(0.0, log_e);
        m.kappas_[j] = k;
        m.log_source_[j] = log_e;
        m.log_scale_[j] = log_s;
        m.scaled_source_[j] = std::exp(log_e - log_s);
        inv_scale_sq[j] = std::exp(-2.0 * log_s);
    }

    m.scaled_entries_.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l)
            m.scaled_entries_(j, l) =
                m.scaled_source_[j] * m.scaled_source_[l] / (m.kappas_[j] + m.kappas_[l]);

    m.scaled_system_ = m.scaled_entries_;
    m.scaled_system_.diagonal() += inv_scale_sq;
    m.factor_.compute(m.scaled_system_);
    if (n > 0 && m.factor_.info() != Eigen::Success)
        throw Error(ErrorKind::WindowExceeded, "Cholesky factorization of 1 + C broke down");
    if (n > 0) {
        const auto diag = m.factor_.matrixLLT().diagonal();
        if (!(diag.array() > 0.0).all() || !diag.allFinite())
            throw Error(ErrorKind::WindowExceeded, "Cholesky factor of 1 + C has a nonpositive pivot");
    }
    return m;
}

Eigen::MatrixXd CauchyMatrix::entries() const {
    const Eigen::Index n = kappas_.size();
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l)
            c(j, l) = std::exp(log_source_[j] + log_source_[l]) / (kappas_[j] + kappas_[l]);
    return c;
}

double logdet(const CauchyMatrix& m) {
    if (m.order() == 0) return 0.0;
    const double scale_part = 2.0 * m.log_scale().sum();
    const double factor_part = 2.0 * m.factor().matrixLLT().diagonal().array().log().sum();
    return std::max(0.0, scale_part + factor_part);
}

DerivativeTensors derivative_tensors(const CauchyMatrix& m) {
    const Eigen::MatrixXd c = m.entries();
    const Eigen::Index n = c.rows();
    DerivativeTensors d{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
    const Eigen::VectorXd& k = m.kappas();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index l = 0; l < n; ++l) {
            d.cx(j, l) = -(k[j] + k[l]) * c(j, l);
            d.ct(j, l) = 4.0 * (k[j] * k[j] * k[j] + k[l] * k[l] * k[l]) * c(j, l);
        }
    }
    return d;
}

LogDetJet::LogDetJet(int max_t, int max_x)
    : max_t_(max_t), max_x_(max_x),
      partials_(static_cast<std::size_t>((max_t + 1) * (max_x + 1)), 0.0) {}

double LogDetJet::partial(int m, int n) const {
    if (m < 0 || n < 0 || m > max_t_ || n > max_x_)
        throw Error(ErrorKind::Unsupported, "requested partial outside the computed jet");
    return partials_[static_cast<std::size_t>(m * (max_x_ + 1) + n)];
}

void LogDetJet::set_partial(int m, int n, double v) {
    partials_[static_cast<std::size_t>(m * (max_x_ + 1) + n)] = v;
}

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double trace_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a.array() * b.transpose().array()).sum();
}

}  // namespace

LogDetJet logdet_jet(const CauchyMatrix& m, int max_t, int max_x) {
    if (max_t < 0 || max_x < 0 || max_t > kMaxJetOrderT || max_x > kMaxJetOrderX) {
        std::ostringstream os;
        os << "jet order (" << max_t << ", " << max_x << ") unsupported; limits are ("
           << kMaxJetOrderT << ", " << kMaxJetOrderX << ")";
        throw Error(ErrorKind::Unsupported, os.str());
    }
    LogDetJet jet(max_t, max_x);
    jet.set_partial(0, 0, logdet(m));
    const Eigen::Index n = static_cast<Eigen::Index>(m.order());
    if (n == 0 || (max_t == 0 && max_x == 0)) return jet;

    const int cols = max_x + 1;
    auto idx = [cols](int a, int b) { return static_cast<std::size_t>(a * cols + b); };
    const Eigen::VectorXd& k = m.kappas();

    // The scaling follows the point: for every j with E_j > 1 take
    // s_j(t', x') = E_j(t', x'). Then 1 + C = S M S with log det S^2 linear
    // in (t, x), and the large block of M is constant. Entry (j, l) of K
    // moves at the rates of its unscaled indices only; the diagonal S^{-2}
    // moves at -2 times the rate of E_j.
    Eigen::VectorXd rt(n), rx(n), dt(n), dx(n), dval(n);
    double lin_t = 0.0, lin_x = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double tr = 4.0 * k[j] * k[j] * k[j];
        const double xr = -k[j];
        const bool scaled = m.log_scale()[j] > 0.0;
        rt[j] = scaled ? 0.0 : tr;
        rx[j] = scaled ? 0.0 : xr;
        dt[j] = scaled ? -2.0 * tr : 0.0;
        dx[j] = scaled ? -2.0 * xr : 0.0;
        dval[j] = scaled ? std::exp(-2.0 * m.log_scale()[j]) : 0.0;
        if (scaled) {
            lin_t += 2.0 * tr;
            lin_x += 2.0 * xr;
        }
    }

    // Taylor coefficients M_ab of the moving-frame system
    Eigen::MatrixXd sum_t(n, n), sum_x(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l) {
            sum_t(j, l) = rt[j] + rt[l];
            sum_x(j, l) = rx[j] + rx[l];
        }
    std::vector<Eigen::MatrixXd> taylor_c(static_cast<std::size_t>((max_t + 1) * cols));
    Eigen::MatrixXd row_t = m.scaled_entries();  // K o (sum_t)^a / a!
    Eigen::VectorXd diag_t = dval;
    for (int a = 0; a <= max_t; ++a) {
        if (a > 0) {
            row_t = row_t.cwiseProduct(sum_t) / static_cast<double>(a);
            diag_t = diag_t.cwiseProduct(dt) / static_cast<double>(a);
        }
        Eigen::MatrixXd cur = row_t;
        Eigen::VectorXd cur_diag = diag_t;
        for (int b = 0; b <= max_x; ++b) {
            if (b > 0) {
                cur = cur.cwiseProduct(sum_x) / static_cast<double>(b);
                cur_diag = cur_diag.cwiseProduct(dx) / static_cast<double>(b);
            }
            if (a == 0 && b == 0) continue;
            taylor_c[idx(a, b)] = cur;
            taylor_c[idx(a, b)].diagonal() += cur_diag;
        }
    }

    // Taylor coefficients of B = (1 + C)^{-1} in the scaled frame.
    const int b_cols = std::max(0, max_x - 1);
    std::vector<Eigen::MatrixXd> inv(static_cast<std::size_t>((max_t + 1) * cols));
    inv[idx(0, 0)] = m.factor().solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd& b00 = inv[idx(0, 0)];
    for (int a = 0; a <= max_t; ++a) {
        for (int b = 0; b <= b_cols; ++b) {
            if (a == 0 && b == 0) continue;
            if (max_x == 0 && a == max_t) continue;  // not referenced
            Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
            for (int i = 0; i <= a; ++i)
                for (int j = 0; j <= b; ++j)
                    if (i != 0 || j != 0) acc.noalias() += taylor_c[idx(i, j)] * inv[idx(a - i, b - j)];
            inv[idx(a, b)].noalias() = -b00 * acc;
        }
    }

    // b L_ab = sum_{i<=a, 1<=j<=b} j tr(M_ij B_{a-i,b-j});  a L_a0 likewise along t.
    for (int a = 0; a <= max_t; ++a) {
        for (int b = 0; b <= max_x; ++b) {
            if (a == 0 && b == 0) continue;
            double coeff = 0.0;
            if (b >= 1) {
                for (int i = 0; i <= a; ++i)
                    for (int j = 1; j <= b; ++j)
                        coeff += j * trace_product(taylor_c[idx(i, j)], inv[idx(a - i, b - j)]);
                coeff /= b;
            } else {
                for (int i = 1; i <= a; ++i)
                    coeff += i * trace_product(taylor_c[idx(i, 0)], inv[idx(a - i, 0)]);
                coeff /= a;
            }
            jet.set_partial(a, b, coeff * factorial(a) * factorial(b));
        }
    }
    if (max_t >= 1) jet.set_partial(1, 0, jet.partial(1, 0) + lin_t);
    if (max_x >= 1) jet.set_partial(0, 1, jet.partial(0, 1) + lin_x);
    return jet;
}

double MinorExpansion::determinant(double x) const {
    double s = 1.0;
    for (const auto& term : terms) s += term.coefficient * std::exp(-term.rate * x);
    return s;
}

double MinorExpansion::log_determinant(double x) const {
    // log-sum-exp over {0} and {log a_I - rate x}
    double top = 0.0;
    for (const auto& term : terms) top = std::max(top, std::log(term.coefficient) - term.rate * x);
    double s = std::exp(-top);
    for (const auto& term : terms) s += std::exp(std::log(term.coefficient) - term.rate * x - top);
    return top + std::log(s);
}

MinorExpansion principal_minor_expansion(const SolitonParams& params, std::size_t order) {
    if (order > kMaxMinorExpansionOrder)
        throw Error(ErrorKind::Unsupported, "principal minor expansion limited to 12 solitons");
    if (order > params.size())
        throw Error(ErrorKind::InvalidArgument, "truncation exceeds stored prefix");

    MinorExpansion out;
    const std::size_t count = (std::size_t{1} << order) - 1;
    out.terms.reserve(count);
    for (std::size_t mask = 1; mask <= count; ++mask) {
        MinorTerm term;
        for (std::size_t j = 0; j < order; ++j)
            if (mask & (std::size_t{1} << j)) term.subset.push_back(j);
        const auto sz = static_cast<Eigen::Index>(term.subset.size());
        Eigen::MatrixXd minor(sz, sz);
        for (Eigen::Index r = 0; r < sz; ++r) {
            const std::size_t j = term.subset[static_cast<std::size_t>(r)];
            term.rate += 2.0 * params.kappas[j];
            for (Eigen::Index s = 0; s < sz; ++s) {
                const std::size_t l = term.subset[static_cast<std::size_t>(s)];
                minor(r, s) = params.norming[j] * params.norming[l] / (params.kappas[j] + params.kappas[l]);
            }
        }
        Eigen::LLT<Eigen::MatrixXd> llt(minor);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorKind::InvalidParams, "principal minor is not positive definite");
        term.coefficient = llt.matrixLLT().diagonal().array().square().prod();
        out.terms.push_back(std::move(term));
    }
    return out;
}

}  // namespace kdvlab
