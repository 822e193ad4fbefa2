#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ghrem {

/// Stacked case-control strata. Within each stratum the observed row comes
/// first, followed by its controls; offsets[s] is the observed row of stratum
/// s and offsets.back() == x.rows().
struct ChoiceData {
    Eigen::MatrixXd x;
    std::vector<std::size_t> offsets;
    std::vector<std::string> names;

    std::size_t n_strata() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t stratum_rows(std::size_t s) const { return offsets[s + 1] - offsets[s]; }
    void check() const;
};

/// Keeps the listed columns, in the given order.
ChoiceData select_columns(const ChoiceData& data, std::span<const std::size_t> cols);

/// Conditional log-likelihood of the observed rows, with optional gradient and
/// Hessian. Stratum terms are computed independently (in parallel when
/// threads != 1) and reduced in stratum order, so the result is identical for
/// every thread count.
double log_partial_likelihood(const ChoiceData& data, const Eigen::VectorXd& beta,
                              Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* hess = nullptr,
                              int threads = 0);

/// Per-stratum score vectors at beta, one row per stratum.
Eigen::MatrixXd stratum_scores(const ChoiceData& data, const Eigen::VectorXd& beta,
                               int threads = 0);

namespace reference {
/// Plain serial summation, kept as an independent check of the kernel above
/// and as the benchmark baseline.
double log_partial_likelihood(const ChoiceData& data, const Eigen::VectorXd& beta,
                              Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* hess = nullptr);
}  // namespace reference

struct FitOptions {
    std::size_t max_iterations = 200;
    double grad_tol = 1e-8;
    double rel_tol = 1e-10;
    double separation_threshold = 50.0;
    double ridge = 1e-8;
    int threads = 0;  // 0: resolve from environment
};

struct FitResult {
    Eigen::VectorXd beta;          // NaN for dropped columns
    Eigen::VectorXd se_robust;     // stratum-clustered sandwich
    Eigen::VectorXd se_naive;      // inverse information
    Eigen::VectorXd z;             // beta / se_robust
    Eigen::VectorXd p_value;       // two-sided normal
    Eigen::MatrixXd vcov_robust;   // NaN rows and columns for dropped
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0;  // at beta = 0
    double aic = 0.0;
    std::size_t n_strata = 0;
    std::size_t n_rows = 0;
    std::size_t iterations = 0;
    bool converged = false;
    bool used_ridge = false;
    std::vector<bool> dropped;     // constant within every stratum, coefficient unidentified
    std::vector<bool> separation;  // estimate ran past the threshold
    std::vector<std::string> names;

    std::size_t n_active() const;
};

/// Newton-Raphson with step halving on the conditional likelihood.
FitResult fit(const ChoiceData& data, const FitOptions& options = {});

inline double aic(std::size_t n_params, double log_likelihood) {
    return 2.0 * static_cast<double>(n_params) - 2.0 * log_likelihood;
}

/// Intensity multiplier for a `delta` increase of one covariate.
inline double effect_multiplier(double beta, double delta = 1.0) {
    return std::exp(beta * delta);
}

struct AicEntry {
    std::string name;
    double aic_alone = 0.0;        // model holding only this column
    double aic_without = 0.0;      // full model minus this column
    double delta_over_null = 0.0;  // aic_alone − aic_null
    double delta_in_full = 0.0;    // aic_full − aic_without
    double pct_over_null = 0.0;    // 100 · delta_over_null / (aic_full − aic_null)
    double pct_in_full = 0.0;      // 100 · delta_in_full  / (aic_full − aic_null)
};

struct AicLedger {
    double logpl_null = 0.0;
    double logpl_full = 0.0;
    double aic_null = 0.0;
    double aic_full = 0.0;
    std::vector<AicEntry> entries;
};

/// Full model, the empty model, and for every column the model with only that
/// column and the full model without it, each fitted from scratch.
AicLedger aic_ledger(const ChoiceData& data, const FitOptions& options = {});

}  // namespace ghrem
