#include "kbie/analysis.hpp"
#include "kbie/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kbie {

namespace {

bool is_diagonal(const Eigen::MatrixXd& g) {
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            if (i != j && g(i, j) != 0.0) return false;
    return true;
}

Eigen::MatrixXcd normalized(const Eigen::MatrixXcd& a, const Eigen::MatrixXd& g) {
    if (is_diagonal(g)) {
        const Eigen::VectorXd d = g.diagonal();
        if (!(d.minCoeff() > 0.0)) throw NumericError("weighted_extremes: Gram matrix is not positive definite");
        const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
        return s.asDiagonal() * a * s.asDiagonal();
    }
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw NumericError("weighted_extremes: Gram matrix is not positive definite");
    const Eigen::MatrixXcd l = llt.matrixL().toDenseMatrix().cast<Complex>();
    const auto tri = l.triangularView<Eigen::Lower>();
    const Eigen::MatrixXcd c = tri.solve(a);
    return tri.solve(c.transpose()).transpose();
}

}  // namespace

SingularExtremes weighted_extremes(const Eigen::MatrixXcd& a, const Eigen::MatrixXd& g) {
    if (a.rows() == 0 || a.rows() != a.cols()) throw DomainError("weighted_extremes: A must be square and nonempty");
    if (g.rows() != a.rows() || g.cols() != a.cols()) throw DomainError("weighted_extremes: size mismatch");
    if (!a.allFinite() || !g.allFinite()) throw NumericError("weighted_extremes: non-finite entries");
    const Eigen::MatrixXcd b = normalized(a, g);
    const Eigen::VectorXd s = Eigen::BDCSVD<Eigen::MatrixXcd>(b).singularValues();
    SingularExtremes out{s.minCoeff(), s.maxCoeff()};
    const double floor = static_cast<double>(b.rows()) * std::numeric_limits<double>::epsilon() * out.sigma_max;
    if (out.sigma_min <= floor) out.sigma_min = 0.0;
    return out;
}

SingularExtremes weighted_extremes(const GalerkinMatrix& a, const GramMatrix& g) {
    return weighted_extremes(a.entries, g.entries);
}

NormReport norm_report(const GalerkinMatrix& a, const GramMatrix& l2, const GramMatrix& vk) {
    NormReport r;
    r.k = a.k.value();
    r.n_dofs = a.size();
    r.norm_L2 = weighted_extremes(a, l2).sigma_max;
    const SingularExtremes hk = weighted_extremes(a, vk);
    r.sigma_min = hk.sigma_min;
    r.sigma_max = hk.sigma_max;
    r.norm_Hk = hk.sigma_max;
    r.invnorm_Hk = hk.sigma_min > 0.0 ? 1.0 / hk.sigma_min : std::numeric_limits<double>::infinity();
    r.cond_Hk = r.norm_Hk * r.invnorm_Hk;
    return r;
}

ConvertedBounds convert_norm_bounds(const NormReport& report, double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("convert_norm_bounds: k must be positive");
    const double lo_n = std::min(1.0, 1.0 / k), hi_n = std::max(1.0, 1.0 / k);
    const double lo_i = std::min(1.0, k), hi_i = std::max(1.0, k);
    ConvertedBounds b;
    b.norm = {lo_n * lo_n * report.norm_Hk, hi_n * hi_n * report.norm_Hk};
    b.inverse = {lo_i * lo_i * report.invnorm_Hk, hi_i * hi_i * report.invnorm_Hk};
    return b;
}

}  // namespace kbie
