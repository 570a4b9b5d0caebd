#include "kdvlab/field.hpp"

#include "kdvlab/error.hpp"
#include "kdvlab/format.hpp"
#include "kdvlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace kdvlab {

double potential_det(const SolitonParams& params, std::size_t order, double t, double x) {
    if (order == 0) return 0.0;
    const auto m = CauchyMatrix::build(params, order, t, x);
    return -2.0 * logdet_jet(m, 0, 2).partial(0, 2);
}

Eigen::VectorXd EigenfunctionJet::derivative(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return coefficient(k) * f;
}

EigenfunctionJet eigenfunction_jet(const CauchyMatrix& m, int max_order) {
    if (max_order < 0 || max_order > kMaxJetOrderX)
        throw Error(ErrorKind::Unsupported, "eigenfunction jet order out of range");
    const Eigen::Index n = static_cast<Eigen::Index>(m.order());
    const Eigen::VectorXd& k = m.kappas();
    const Eigen::VectorXd& f = m.scaled_source();
    const Eigen::MatrixXd& kmat = m.scaled_entries();

    // Phi = S Psi solves M Phi_k = F o (-kappa)^k / k! - sum_i (K o W_i) Phi_{k-i}
    std::vector<Eigen::VectorXd> phi;
    phi.reserve(static_cast<std::size_t>(max_order) + 1);
    Eigen::MatrixXd pair_rate(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l) pair_rate(j, l) = -(k[j] + k[l]);

    Eigen::VectorXd source_k = f;
    Eigen::MatrixXd weight = Eigen::MatrixXd::Ones(n, n);
    std::vector<Eigen::MatrixXd> taylor_c;  // taylor_c[i-1] = K o W_i
    for (int order = 0; order <= max_order; ++order) {
        Eigen::VectorXd rhs = source_k;
        if (order > 0) {
            weight = weight.cwiseProduct(pair_rate) / static_cast<double>(order);
            taylor_c.push_back(kmat.cwiseProduct(weight));
            for (int i = 1; i <= order; ++i)
                rhs.noalias() -= taylor_c[static_cast<std::size_t>(i - 1)] * phi[static_cast<std::size_t>(order - i)];
        }
        phi.push_back(m.factor().solve(rhs));
        source_k = source_k.cwiseProduct(-k) / static_cast<double>(order + 1);
    }

    const Eigen::VectorXd inv_scale = (-m.log_scale()).array().exp();
    std::vector<Eigen::VectorXd> psi;
    psi.reserve(phi.size());
    for (auto& p : phi) psi.push_back(p.cwiseProduct(inv_scale));
    return EigenfunctionJet(std::move(psi));
}

EigenfunctionColumn eigenfunctions(const SolitonParams& params, std::size_t order, double t, double x) {
    if (order == 0) return {};
    const auto m = CauchyMatrix::build(params, order, t, x);
    const auto jet = eigenfunction_jet(m, 1);
    return {jet.derivative(0), jet.derivative(1)};
}

double potential_sq(const SolitonParams& params, std::size_t order, double t, double x) {
    if (order == 0) return 0.0;
    const auto m = CauchyMatrix::build(params, order, t, x);
    const Eigen::VectorXd psi = eigenfunction_jet(m, 0).derivative(0);
    return -4.0 * (m.kappas().array() * psi.array().square()).sum();
}

std::vector<double> potential_x_derivatives(const SolitonParams& params, std::size_t order, double t,
                                            double x, int max_order, JetRoute route) {
    if (max_order < 0) throw Error(ErrorKind::InvalidArgument, "negative derivative order");
    std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
    if (order == 0) return out;
    const auto m = CauchyMatrix::build(params, order, t, x);

    if (route == JetRoute::Determinant) {
        if (max_order + 2 > kMaxJetOrderX) throw Error(ErrorKind::Unsupported, "x-jet order too high");
        const auto jet = logdet_jet(m, 0, max_order + 2);
        for (int d = 0; d <= max_order; ++d) out[static_cast<std::size_t>(d)] = -2.0 * jet.partial(0, d + 2);
        return out;
    }

    const auto jet = eigenfunction_jet(m, max_order);
    const Eigen::VectorXd& k = m.kappas();
    // V_d / d! = -4 sum_j kappa_j sum_{i} psi_{j,i} psi_{j,d-i}  (Taylor coefficients)
    double fact = 1.0;
    for (int d = 0; d <= max_order; ++d) {
        if (d > 0) fact *= d;
        Eigen::VectorXd sq = Eigen::VectorXd::Zero(k.size());
        for (int i = 0; i <= d; ++i) sq += jet.coefficient(i).cwiseProduct(jet.coefficient(d - i));
        out[static_cast<std::size_t>(d)] = -4.0 * k.dot(sq) * fact;
    }
    return out;
}

KdvTerms kdv_terms(const SolitonParams& params, std::size_t order, double t, double x) {
    KdvTerms r;
    if (order == 0) return r;
    const auto m = CauchyMatrix::build(params, order, t, x);
    const auto jet = logdet_jet(m, 1, 5);
    r.v = -2.0 * jet.partial(0, 2);
    r.vx = -2.0 * jet.partial(0, 3);
    r.vxxx = -2.0 * jet.partial(0, 5);
    r.vt = -2.0 * jet.partial(1, 2);
    r.residual = r.vt - 6.0 * r.v * r.vx + r.vxxx;
    return r;
}

std::vector<double> FieldSample::slice(std::size_t it) const {
    const auto first = v.begin() + static_cast<std::ptrdiff_t>(index(it, 0));
    return {first, first + static_cast<std::ptrdiff_t>(x_values.size())};
}

FieldSample sample_field(const SolitonParams& params, std::size_t order, const FieldGrid& grid,
                         const FieldOrders& orders) {
    if (grid.t_values.empty() || grid.x_values.empty())
        throw Error(ErrorKind::InvalidArgument, "field grid is empty");
    if (!std::is_sorted(grid.x_values.begin(), grid.x_values.end()))
        throw Error(ErrorKind::InvalidArgument, "x grid must be ascending");
    if (order > params.size()) throw Error(ErrorKind::InvalidArgument, "truncation exceeds stored prefix");

    FieldSample s;
    s.t_values = grid.t_values;
    s.x_values = grid.x_values;
    s.truncation = order;
    const double t_worst = *std::max_element(grid.t_values.begin(), grid.t_values.end());
    s.eps_tail = tail_trace_bound(params, order + 1, t_worst, grid.x_values.front());

    const std::size_t nodes = grid.t_values.size() * grid.x_values.size();
    s.v.assign(nodes, 0.0);
    const bool need_t = orders.vt || orders.residual;
    const int need_x = (orders.vxxx || orders.residual) ? 5 : (orders.vx ? 3 : 2);
    if (orders.vt) s.vt.assign(nodes, 0.0);
    if (orders.vx) s.vx.assign(nodes, 0.0);
    if (orders.vxxx) s.vxxx.assign(nodes, 0.0);
    if (orders.residual) s.residual.assign(nodes, 0.0);

    const std::size_t nx = grid.x_values.size();
    parallel_for(nodes, [&](std::size_t node) {
        if (order == 0) return;
        const double t = grid.t_values[node / nx];
        const double x = grid.x_values[node % nx];
        const auto m = CauchyMatrix::build(params, order, t, x);
        const auto jet = logdet_jet(m, need_t ? 1 : 0, need_x);
        const double v = -2.0 * jet.partial(0, 2);
        s.v[node] = v;
        if (orders.vt) s.vt[node] = -2.0 * jet.partial(1, 2);
        if (orders.vx) s.vx[node] = -2.0 * jet.partial(0, 3);
        if (orders.vxxx) s.vxxx[node] = -2.0 * jet.partial(0, 5);
        if (orders.residual)
            s.residual[node] = -2.0 * jet.partial(1, 2) - 6.0 * v * (-2.0 * jet.partial(0, 3)) -
                               2.0 * jet.partial(0, 5);
    });
    return s;
}

void write_csv(const FieldSample& field, std::ostream& out) {
    out << "t,x,V";
    if (!field.vt.empty()) out << ",Vt";
    if (!field.vx.empty()) out << ",Vx";
    if (!field.vxxx.empty()) out << ",Vxxx";
    if (!field.residual.empty()) out << ",kdv_residual";
    out << '\n';
    for (std::size_t it = 0; it < field.t_values.size(); ++it) {
        for (std::size_t ix = 0; ix < field.x_values.size(); ++ix) {
            const std::size_t i = field.index(it, ix);
            out << format_double(field.t_values[it]) << ',' << format_double(field.x_values[ix]) << ','
                << format_double(field.v[i]);
            if (!field.vt.empty()) out << ',' << format_double(field.vt[i]);
            if (!field.vx.empty()) out << ',' << format_double(field.vx[i]);
            if (!field.vxxx.empty()) out << ',' << format_double(field.vxxx[i]);
            if (!field.residual.empty()) out << ',' << format_double(field.residual[i]);
            out << '\n';
        }
    }
}

}  // namespace kdvlab
