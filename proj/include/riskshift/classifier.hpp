#pragma once

// Weighted binary classifiers backing the per-timestep hazard estimators:
// a constant (weighted mean) model and an L2-penalized logistic regression
// fitted by damped iteratively reweighted least squares.
//
// Penalty convention: minimize sum_i w_i * logloss_i + (1/(2c)) * ||beta||^2
// with the intercept unpenalized, so larger c means weaker regularization.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskshift/matrix.hpp"

namespace riskshift {

struct LogisticOptions {
    double c = 100.0;
    int max_iter = 100;
    double tol = 1e-8;
};

struct ClassifierSpec {
    enum class Kind : std::uint8_t { Constant, Logistic };
    Kind kind = Kind::Constant;
    LogisticOptions logistic;

    static ClassifierSpec constant() { return {}; }
    static ClassifierSpec logistic_l2(double c, int max_iter = 100, double tol = 1e-8) {
        ClassifierSpec s;
        s.kind = Kind::Logistic;
        s.logistic = {c, max_iter, tol};
        return s;
    }
    std::string name() const {
        return kind == Kind::Constant ? "constant" : "logistic";
    }
};

struct FitDiagnostics {
    int iterations = 0;
    bool converged = true;
    bool degenerate = false;   // empty cell or single-class labels
    std::size_t n = 0;
    double effective_n = 0;    // (sum w)^2 / sum w^2
};

// Probability clamp applied at prediction time to protect downstream
// survival products.
inline constexpr double kProbEps = 1e-12;

class FittedClassifier {
public:
    enum class Kind : std::uint8_t { Constant, Logistic };

    static FittedClassifier constant(double p_hat, FitDiagnostics diag = {});
    static FittedClassifier logistic(double intercept, std::vector<double> coef,
                                     FitDiagnostics diag = {});

    // Clamped to [kProbEps, 1 - kProbEps]. Throws ShapeError on dimension
    // mismatch for the logistic kind.
    double predict_proba(std::span<const double> x) const;

    Kind kind() const { return kind_; }
    double p_hat() const { return p_hat_; }
    double intercept() const { return intercept_; }
    const std::vector<double>& coefficients() const { return coef_; }
    const FitDiagnostics& diagnostics() const { return diag_; }

private:
    Kind kind_ = Kind::Constant;
    double p_hat_ = 0.0;
    double intercept_ = 0.0;
    std::vector<double> coef_;
    FitDiagnostics diag_;
};

// Weighted fit; weights must be nonnegative and not all zero. Degenerate
// label sets (all 0 or all 1 among positive-weight rows) fall back to the
// constant model. Non-convergence returns the best iterate with
// converged=false.
FittedClassifier fit(const ClassifierSpec& spec, const Matrix& features,
                     std::span<const std::uint8_t> labels,
                     std::span<const double> weights);

// Penalized weighted logloss; exposed for the objective-monotonicity tests.
double penalized_loss(const Matrix& features, std::span<const std::uint8_t> labels,
                      std::span<const double> weights, double intercept,
                      std::span<const double> coef, double c);

inline constexpr double kDefaultPenaltyGridValues[] = {1e-3, 1e-2, 1e-1, 1.0};
inline constexpr std::span<const double> kDefaultPenaltyGrid{kDefaultPenaltyGridValues, 4};

// Inverse-penalty selection by k-fold cross-validated log-loss over a small
// grid; deterministic given the seed. Returns the grid value with the lowest
// held-out weighted log-loss.
double select_penalty_cv(const Matrix& features, std::span<const std::uint8_t> labels,
                         std::span<const double> weights,
                         std::span<const double> grid = kDefaultPenaltyGrid,
                         int folds = 5, std::uint64_t seed = 0);

// JSON form: {"kind": "constant"} or
// {"kind": "logistic", "c": 100, "max_iter": 100, "tol": 1e-8}.
ClassifierSpec classifier_spec_from_json(const nlohmann::json& j);
nlohmann::json classifier_spec_to_json(const ClassifierSpec& s);

}  // namespace riskshift
