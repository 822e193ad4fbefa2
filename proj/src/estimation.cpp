#include "ghrem/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ghrem/threading.hpp"

namespace ghrem {

void ChoiceData::check() const {
    if (offsets.size() < 2) throw std::invalid_argument("choice data holds no strata");
    if (offsets.front() != 0) throw std::invalid_argument("offsets must start at 0");
    if (offsets.back() != static_cast<std::size_t>(x.rows()))
        throw std::invalid_argument("offsets must end at the row count");
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s)
        if (offsets[s + 1] <= offsets[s])
            throw std::invalid_argument("every stratum needs at least one row");
    if (!names.empty() && names.size() != static_cast<std::size_t>(x.cols()))
        throw std::invalid_argument("column name count mismatch");
}

ChoiceData select_columns(const ChoiceData& data, std::span<const std::size_t> cols) {
    ChoiceData out;
    out.offsets = data.offsets;
    out.x.resize(data.x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] >= static_cast<std::size_t>(data.x.cols()))
            throw std::out_of_range("column index out of range");
        out.x.col(static_cast<Eigen::Index>(j)) = data.x.col(static_cast<Eigen::Index>(cols[j]));
        if (!data.names.empty()) out.names.push_back(data.names[cols[j]]);
    }
    return out;
}

namespace {

// One stratum's contribution, max-shifted for stability. At beta == 0 this
// reduces exactly to -log(rows).
void stratum_terms(const ChoiceData& d, std::size_t s, const Eigen::VectorXd& beta,
                   double& logpl, double* grad, double* hess) {
    const Eigen::Index p = beta.size();
    const auto lo = static_cast<Eigen::Index>(d.offsets[s]);
    const auto n = static_cast<Eigen::Index>(d.offsets[s + 1] - d.offsets[s]);
    auto rows = d.x.middleRows(lo, n);

    Eigen::VectorXd eta = rows * beta;
    const double shift = eta.maxCoeff();
    Eigen::VectorXd w = (eta.array() - shift).exp();
    const double z = w.sum();
    logpl = eta(0) - shift - std::log(z);
    if (!grad) return;

    w /= z;
    Eigen::VectorXd xbar = rows.transpose() * w;
    Eigen::Map<Eigen::VectorXd>(grad, p) = rows.row(0).transpose() - xbar;
    if (!hess) return;

    Eigen::MatrixXd exx = rows.transpose() * (w.asDiagonal() * rows);
    Eigen::Map<Eigen::MatrixXd>(hess, p, p) = -(exx - xbar * xbar.transpose());
}

}  // namespace

double log_partial_likelihood(const ChoiceData& data, const Eigen::VectorXd& beta,
                              Eigen::VectorXd* grad, Eigen::MatrixXd* hess, int threads) {
    data.check();
    if (beta.size() != data.x.cols()) throw std::invalid_argument("beta size mismatch");
    const std::size_t S = data.n_strata();
    const Eigen::Index p = beta.size();
    const int nt = resolve_threads(threads);

    std::vector<double> logpls(S);
    Eigen::MatrixXd grads;
    std::vector<double> hess_buf;
    if (grad) grads.resize(p, static_cast<Eigen::Index>(S));
    if (hess) hess_buf.resize(S * static_cast<std::size_t>(p) * static_cast<std::size_t>(p));

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
    for (std::int64_t si = 0; si < static_cast<std::int64_t>(S); ++si) {
        const auto s = static_cast<std::size_t>(si);
        stratum_terms(data, s, beta, logpls[s],
                      grad ? grads.col(static_cast<Eigen::Index>(s)).data() : nullptr,
                      hess ? hess_buf.data() + s * static_cast<std::size_t>(p * p) : nullptr);
    }
    (void)nt;

    // Reduce in stratum order regardless of thread count.
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) total += logpls[s];
    if (grad) {
        grad->setZero(p);
        for (std::size_t s = 0; s < S; ++s) *grad += grads.col(static_cast<Eigen::Index>(s));
    }
    if (hess) {
        hess->setZero(p, p);
        for (std::size_t s = 0; s < S; ++s)
            *hess += Eigen::Map<const Eigen::MatrixXd>(
                hess_buf.data() + s * static_cast<std::size_t>(p * p), p, p);
    }
    return total;
}

Eigen::MatrixXd stratum_scores(const ChoiceData& data, const Eigen::VectorXd& beta, int threads) {
    data.check();
    if (beta.size() != data.x.cols()) throw std::invalid_argument("beta size mismatch");
    const std::size_t S = data.n_strata();
    const Eigen::Index p = beta.size();
    const int nt = resolve_threads(threads);

    Eigen::MatrixXd scores(static_cast<Eigen::Index>(S), p);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
    for (std::int64_t si = 0; si < static_cast<std::int64_t>(S); ++si) {
        const auto s = static_cast<std::size_t>(si);
        double logpl = 0.0;
        Eigen::VectorXd g(p);
        stratum_terms(data, s, beta, logpl, g.data(), nullptr);
        scores.row(static_cast<Eigen::Index>(s)) = g.transpose();
    }
    (void)nt;
    return scores;
}

namespace reference {

double log_partial_likelihood(const ChoiceData& data, const Eigen::VectorXd& beta,
                              Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
    data.check();
    if (beta.size() != data.x.cols()) throw std::invalid_argument("beta size mismatch");
    const Eigen::Index p = beta.size();
    double total = 0.0;
    if (grad) grad->setZero(p);
    if (hess) hess->setZero(p, p);

    for (std::size_t s = 0; s + 1 < data.offsets.size(); ++s) {
        const std::size_t lo = data.offsets[s], hi = data.offsets[s + 1];
        double denom = 0.0;
        Eigen::VectorXd wx = Eigen::VectorXd::Zero(p);
        Eigen::MatrixXd wxx = Eigen::MatrixXd::Zero(p, p);
        for (std::size_t r = lo; r < hi; ++r) {
            double eta = 0.0;
            for (Eigen::Index j = 0; j < p; ++j)
                eta += data.x(static_cast<Eigen::Index>(r), j) * beta(j);
            const double w = std::exp(eta);
            denom += w;
            for (Eigen::Index j = 0; j < p; ++j) {
                wx(j) += w * data.x(static_cast<Eigen::Index>(r), j);
                if (hess)
                    for (Eigen::Index k = 0; k < p; ++k)
                        wxx(j, k) += w * data.x(static_cast<Eigen::Index>(r), j) *
                                     data.x(static_cast<Eigen::Index>(r), k);
            }
        }
        double eta_event = 0.0;
        for (Eigen::Index j = 0; j < p; ++j)
            eta_event += data.x(static_cast<Eigen::Index>(lo), j) * beta(j);
        total += eta_event - std::log(denom);
        if (grad)
            for (Eigen::Index j = 0; j < p; ++j)
                (*grad)(j) += data.x(static_cast<Eigen::Index>(lo), j) - wx(j) / denom;
        if (hess)
            for (Eigen::Index j = 0; j < p; ++j)
                for (Eigen::Index k = 0; k < p; ++k)
                    (*hess)(j, k) -= wxx(j, k) / denom - (wx(j) / denom) * (wx(k) / denom);
    }
    return total;
}

}  // namespace reference

std::size_t FitResult::n_active() const {
    std::size_t n = 0;
    for (bool d : dropped) n += d ? 0 : 1;
    return n;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Columns that never vary within any stratum cancel from every likelihood
// ratio, so their coefficients are unidentified.
std::vector<bool> find_degenerate_columns(const ChoiceData& data) {
    const Eigen::Index p = data.x.cols();
    std::vector<bool> varies(static_cast<std::size_t>(p), false);
    for (std::size_t s = 0; s + 1 < data.offsets.size(); ++s) {
        const auto lo = static_cast<Eigen::Index>(data.offsets[s]);
        const auto n = static_cast<Eigen::Index>(data.offsets[s + 1] - data.offsets[s]);
        auto rows = data.x.middleRows(lo, n);
        Eigen::RowVectorXd mn = rows.colwise().minCoeff();
        Eigen::RowVectorXd mx = rows.colwise().maxCoeff();
        for (Eigen::Index j = 0; j < p; ++j)
            if (mx(j) > mn(j)) varies[static_cast<std::size_t>(j)] = true;
    }
    std::vector<bool> dropped(static_cast<std::size_t>(p));
    for (std::size_t j = 0; j < dropped.size(); ++j) dropped[j] = !varies[j];
    return dropped;
}

// Solves A x = b for symmetric A, adding an escalating ridge until the
// factorization succeeds. Reports whether a ridge was needed.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double ridge0,
                          bool& used_ridge) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all()) {
        Eigen::MatrixXd x = ldlt.solve(b);
        if (x.allFinite()) return x;
    }
    double lambda = ridge0;
    const Eigen::Index p = a.rows();
    for (int attempt = 0; attempt < 24; ++attempt, lambda *= 10.0) {
        Eigen::MatrixXd reg = a + lambda * Eigen::MatrixXd::Identity(p, p);
        Eigen::LDLT<Eigen::MatrixXd> l2(reg);
        if (l2.info() != Eigen::Success || !(l2.vectorD().array() > 0).all()) continue;
        Eigen::MatrixXd x = l2.solve(b);
        if (x.allFinite()) {
            used_ridge = true;
            return x;
        }
    }
    throw std::runtime_error("information matrix is singular beyond ridge repair");
}

}  // namespace

FitResult fit(const ChoiceData& data, const FitOptions& options) {
    data.check();
    const std::size_t P = static_cast<std::size_t>(data.x.cols());

    FitResult res;
    res.names = data.names;
    res.n_strata = data.n_strata();
    res.n_rows = static_cast<std::size_t>(data.x.rows());
    res.dropped = find_degenerate_columns(data);
    res.separation.assign(P, false);

    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < P; ++j)
        if (!res.dropped[j]) active.push_back(j);
    const auto p = static_cast<Eigen::Index>(active.size());

    ChoiceData sub = select_columns(data, active);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd g(p);
    Eigen::MatrixXd h(p, p);

    res.null_log_likelihood = log_partial_likelihood(sub, Eigen::VectorXd::Zero(p), nullptr,
                                                     nullptr, options.threads);

    double ll = res.null_log_likelihood;
    double ll_prev = ll;
    bool converged = p == 0;
    std::size_t iter = 0;

    for (; iter < options.max_iterations && p > 0; ++iter) {
        ll = log_partial_likelihood(sub, beta, &g, &h, options.threads);
        const double gmax = g.cwiseAbs().maxCoeff();
        const bool small_change = iter == 0 || std::abs(ll - ll_prev) <= options.rel_tol * (1.0 + std::abs(ll));
        if (gmax < options.grad_tol && small_change) {
            converged = true;
            break;
        }
        ll_prev = ll;

        Eigen::VectorXd step = solve_spd(-h, g, options.ridge, res.used_ridge);
        // near the optimum the true gain can sit below the resolution of ll,
        // so steps are accepted as long as they do not worsen it beyond
        // rounding noise
        const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ll));
        double t = 1.0;
        double ll_new = log_partial_likelihood(sub, beta + t * step, nullptr, nullptr,
                                               options.threads);
        int halvings = 0;
        while ((!std::isfinite(ll_new) || ll_new < ll - slack) && halvings < 40) {
            t *= 0.5;
            ll_new = log_partial_likelihood(sub, beta + t * step, nullptr, nullptr,
                                            options.threads);
            ++halvings;
        }
        if (!std::isfinite(ll_new) || ll_new < ll - slack) break;  // no ascent left
        beta += t * step;
    }
    res.iterations = iter;
    res.converged = converged;

    if (p > 0) ll = log_partial_likelihood(sub, beta, &g, &h, options.threads);
    res.log_likelihood = ll;
    res.aic = aic(static_cast<std::size_t>(p), ll);

    for (Eigen::Index j = 0; j < p; ++j)
        if (std::abs(beta(j)) > options.separation_threshold) res.separation[active[j]] = true;

    Eigen::MatrixXd vcov_naive = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd vcov_robust = Eigen::MatrixXd::Zero(p, p);
    if (p > 0) {
        Eigen::MatrixXd info_inv =
            solve_spd(-h, Eigen::MatrixXd::Identity(p, p), options.ridge, res.used_ridge);
        vcov_naive = info_inv;
        Eigen::MatrixXd scores = stratum_scores(sub, beta, options.threads);
        Eigen::MatrixXd meat = scores.transpose() * scores;
        vcov_robust = info_inv * meat * info_inv;
    }

    res.beta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(P), kNaN);
    res.se_robust = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(P), kNaN);
    res.se_naive = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(P), kNaN);
    res.z = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(P), kNaN);
    res.p_value = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(P), kNaN);
    res.vcov_robust =
        Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P), kNaN);

    for (Eigen::Index j = 0; j < p; ++j) {
        const auto J = static_cast<Eigen::Index>(active[static_cast<std::size_t>(j)]);
        res.beta(J) = beta(j);
        res.se_naive(J) = std::sqrt(vcov_naive(j, j));
        res.se_robust(J) = std::sqrt(vcov_robust(j, j));
        res.z(J) = beta(j) / res.se_robust(J);
        res.p_value(J) = std::erfc(std::abs(res.z(J)) / std::sqrt(2.0));
        for (Eigen::Index k = 0; k < p; ++k) {
            const auto K = static_cast<Eigen::Index>(active[static_cast<std::size_t>(k)]);
            res.vcov_robust(J, K) = vcov_robust(j, k);
        }
    }
    return res;
}

AicLedger aic_ledger(const ChoiceData& data, const FitOptions& options) {
    data.check();
    const std::size_t P = static_cast<std::size_t>(data.x.cols());

    FitResult full = fit(data, options);
    AicLedger ledger;
    ledger.logpl_full = full.log_likelihood;
    ledger.logpl_null = full.null_log_likelihood;
    ledger.aic_full = full.aic;
    ledger.aic_null = aic(0, full.null_log_likelihood);
    const double span = ledger.aic_full - ledger.aic_null;

    for (std::size_t j = 0; j < P; ++j) {
        AicEntry entry;
        entry.name = data.names.empty() ? "col" + std::to_string(j) : data.names[j];

        const std::size_t alone_cols[] = {j};
        FitResult alone = fit(select_columns(data, alone_cols), options);
        entry.aic_alone = alone.aic;

        std::vector<std::size_t> rest;
        for (std::size_t k = 0; k < P; ++k)
            if (k != j) rest.push_back(k);
        FitResult without = fit(select_columns(data, rest), options);
        entry.aic_without = without.aic;

        entry.delta_over_null = entry.aic_alone - ledger.aic_null;
        entry.delta_in_full = ledger.aic_full - entry.aic_without;
        entry.pct_over_null = span != 0.0 ? 100.0 * entry.delta_over_null / span : kNaN;
        entry.pct_in_full = span != 0.0 ? 100.0 * entry.delta_in_full / span : kNaN;
        ledger.entries.push_back(std::move(entry));
    }
    return ledger;
}

}  // namespace ghrem
