#include "riskshift/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskshift/errors.hpp"
#include "riskshift/rng.hpp"

namespace riskshift {

namespace {

double clamp_prob(double p) {
    return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

double sigmoid(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// logloss(y, sigmoid(eta)) evaluated without forming the probability.
double logloss(double eta, double y) {
    // log(1 + exp(eta)) - y * eta, stable for large |eta|
    const double softplus = eta > 0 ? eta + std::log1p(std::exp(-eta))
                                    : std::log1p(std::exp(eta));
    return softplus - y * eta;
}

// Solves (d x d) symmetric positive definite system in place via Cholesky.
// Returns false if the factorization breaks down.
bool cholesky_solve(std::vector<double>& h, std::vector<double>& b, std::size_t d) {
    for (std::size_t j = 0; j < d; ++j) {
        double diag = h[j * d + j];
        for (std::size_t q = 0; q < j; ++q) diag -= h[j * d + q] * h[j * d + q];
        if (diag <= 0) return false;
        diag = std::sqrt(diag);
        h[j * d + j] = diag;
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = h[i * d + j];
            for (std::size_t q = 0; q < j; ++q) v -= h[i * d + q] * h[j * d + q];
            h[i * d + j] = v / diag;
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        double v = b[i];
        for (std::size_t q = 0; q < i; ++q) v -= h[i * d + q] * b[q];
        b[i] = v / h[i * d + i];
    }
    for (std::size_t ii = d; ii-- > 0;) {
        double v = b[ii];
        for (std::size_t q = ii + 1; q < d; ++q) v -= h[q * d + ii] * b[q];
        b[ii] = v / h[ii * d + ii];
    }
    return true;
}

FitDiagnostics make_diag(std::span<const double> weights) {
    FitDiagnostics diag;
    diag.n = weights.size();
    double sw = 0, sw2 = 0;
    for (double w : weights) {
        sw += w;
        sw2 += w * w;
    }
    diag.effective_n = sw2 > 0 ? sw * sw / sw2 : 0.0;
    return diag;
}

}  // namespace

FittedClassifier FittedClassifier::constant(double p_hat, FitDiagnostics diag) {
    FittedClassifier m;
    m.kind_ = Kind::Constant;
    m.p_hat_ = p_hat;
    m.diag_ = diag;
    return m;
}

FittedClassifier FittedClassifier::logistic(double intercept, std::vector<double> coef,
                                            FitDiagnostics diag) {
    FittedClassifier m;
    m.kind_ = Kind::Logistic;
    m.intercept_ = intercept;
    m.coef_ = std::move(coef);
    m.diag_ = diag;
    return m;
}

double FittedClassifier::predict_proba(std::span<const double> x) const {
    if (kind_ == Kind::Constant) return clamp_prob(p_hat_);
    if (x.size() != coef_.size())
        throw ShapeError("predict_proba: covariate dimension mismatch");
    double eta = intercept_;
    for (std::size_t j = 0; j < coef_.size(); ++j) eta += coef_[j] * x[j];
    return clamp_prob(sigmoid(eta));
}

double penalized_loss(const Matrix& features, std::span<const std::uint8_t> labels,
                      std::span<const double> weights, double intercept,
                      std::span<const double> coef, double c) {
    double loss = 0;
    for (std::size_t i = 0; i < features.rows; ++i) {
        double eta = intercept;
        auto xi = features.row(i);
        for (std::size_t j = 0; j < coef.size(); ++j) eta += coef[j] * xi[j];
        loss += weights[i] * logloss(eta, labels[i]);
    }
    double pen = 0;
    for (double b : coef) pen += b * b;
    return loss + pen / (2.0 * c);
}

namespace {

FittedClassifier fit_logistic(const LogisticOptions& opt, const Matrix& features,
                              std::span<const std::uint8_t> labels,
                              std::span<const double> weights, FitDiagnostics diag) {
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    const std::size_t p = d + 1;  // intercept first

    std::vector<double> beta(p, 0.0);
    std::vector<double> eta(n, 0.0);
    std::vector<double> grad(p), step(p), hess(p * p);
    std::vector<double> trial(p), trial_eta(n);

    auto objective = [&](const std::vector<double>& b, std::vector<double>& out_eta) {
        double loss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = b[0];
            auto xi = features.row(i);
            for (std::size_t j = 0; j < d; ++j) e += b[j + 1] * xi[j];
            out_eta[i] = e;
            loss += weights[i] * logloss(e, labels[i]);
        }
        double pen = 0;
        for (std::size_t j = 1; j < p; ++j) pen += b[j] * b[j];
        return loss + pen / (2.0 * opt.c);
    };

    double obj = objective(beta, eta);
    diag.converged = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = sigmoid(eta[i]);
            const double r = weights[i] * (pi - labels[i]);
            const double v = std::max(weights[i] * pi * (1.0 - pi), 0.0);
            auto xi = features.row(i);
            grad[0] += r;
            hess[0] += v;
            for (std::size_t j = 0; j < d; ++j) {
                grad[j + 1] += r * xi[j];
                hess[(j + 1) * p] += v * xi[j];
                for (std::size_t q = 0; q <= j; ++q)
                    hess[(j + 1) * p + (q + 1)] += v * xi[j] * xi[q];
            }
        }
        for (std::size_t j = 1; j < p; ++j) {
            grad[j] += beta[j] / opt.c;
            hess[j * p + j] += 1.0 / opt.c;
        }
        // Mirror the lower triangle and guard the factorization.
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t q = i + 1; q < p; ++q) hess[i * p + q] = hess[q * p + i];
        for (std::size_t j = 0; j < p; ++j) hess[j * p + j] += 1e-10;

        step = grad;
        std::vector<double> hcopy = hess;
        if (!cholesky_solve(hcopy, step, p)) break;

        // Damped Newton: halve until the objective does not increase.
        double lambda = 1.0;
        bool accepted = false;
        for (int half = 0; half < 60; ++half) {
            for (std::size_t j = 0; j < p; ++j) trial[j] = beta[j] - lambda * step[j];
            const double trial_obj = objective(trial, trial_eta);
            if (trial_obj <= obj + 1e-12) {
                double max_delta = 0;
                for (std::size_t j = 0; j < p; ++j)
                    max_delta = std::max(max_delta, std::abs(lambda * step[j]));
                beta = trial;
                eta = trial_eta;
                obj = trial_obj;
                accepted = true;
                if (max_delta < opt.tol) {
                    diag.converged = true;
                    it++;
                }
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted || diag.converged) break;
    }
    diag.iterations = it;
    return FittedClassifier::logistic(beta[0], {beta.begin() + 1, beta.end()}, diag);
}

}  // namespace

FittedClassifier fit(const ClassifierSpec& spec, const Matrix& features,
                     std::span<const std::uint8_t> labels,
                     std::span<const double> weights) {
    const std::size_t n = features.rows;
    if (n == 0) throw EmptyAtRiskSet("fit: empty at-risk set");
    if (labels.size() != n || weights.size() != n)
        throw ShapeError("fit: rows, labels and weights must align");

    double sw = 0, swy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] < 0) throw DegenerateWeights("fit: negative weight");
        sw += weights[i];
        swy += weights[i] * labels[i];
    }
    if (sw <= 0) throw DegenerateWeights("fit: weights sum to zero");
    const double mean = swy / sw;

    FitDiagnostics diag = make_diag(weights);

    if (spec.kind == ClassifierSpec::Kind::Constant)
        return FittedClassifier::constant(mean, diag);

    // Single-class cells (routine at late timesteps) cannot support a
    // logistic fit; fall back to the constant model.
    if (mean <= 0.0 || mean >= 1.0) {
        diag.degenerate = true;
        return FittedClassifier::constant(mean, diag);
    }
    return fit_logistic(spec.logistic, features, labels, weights, diag);
}

double select_penalty_cv(const Matrix& features, std::span<const std::uint8_t> labels,
                         std::span<const double> weights, std::span<const double> grid,
                         int folds, std::uint64_t seed) {
    const std::size_t n = features.rows;
    if (n < static_cast<std::size_t>(folds) || folds < 2)
        throw ConfigError("select_penalty_cv: need at least one row per fold");
    if (grid.empty()) throw ConfigError("select_penalty_cv: empty grid");

    // deterministic shuffled fold assignment
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(seed, 0xCF));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double best_c = grid[0];
    double best_loss = std::numeric_limits<double>::infinity();
    for (double c : grid) {
        double held_out = 0;
        for (int f = 0; f < folds; ++f) {
            Matrix train_x(0, features.cols);
            std::vector<std::uint8_t> train_y;
            std::vector<double> train_w;
            train_x.rows = 0;
            std::vector<std::size_t> test_rows;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t row = order[i];
                if (static_cast<int>(i % static_cast<std::size_t>(folds)) == f) {
                    test_rows.push_back(row);
                } else {
                    train_x.data.insert(train_x.data.end(), features.row(row).begin(),
                                        features.row(row).end());
                    ++train_x.rows;
                    train_y.push_back(labels[row]);
                    train_w.push_back(weights[row]);
                }
            }
            const FittedClassifier model =
                fit(ClassifierSpec::logistic_l2(c), train_x, train_y, train_w);
            for (std::size_t row : test_rows) {
                const double p = model.predict_proba(features.row(row));
                held_out -= weights[row] * (labels[row] ? std::log(p) : std::log1p(-p));
            }
        }
        if (held_out < best_loss) {
            best_loss = held_out;
            best_c = c;
        }
    }
    return best_c;
}

ClassifierSpec classifier_spec_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "constant") return ClassifierSpec::constant();
        if (kind == "logistic")
            return ClassifierSpec::logistic_l2(j.value("c", 100.0),
                                               j.value("max_iter", 100),
                                               j.value("tol", 1e-8));
        throw ConfigError("unknown classifier kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad classifier spec: ") + e.what());
    }
}

nlohmann::json classifier_spec_to_json(const ClassifierSpec& s) {
    if (s.kind == ClassifierSpec::Kind::Constant) return {{"kind", "constant"}};
    return {{"kind", "logistic"},
            {"c", s.logistic.c},
            {"max_iter", s.logistic.max_iter},
            {"tol", s.logistic.tol}};
}

}  // namespace riskshift
