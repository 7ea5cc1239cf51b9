#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace oracle {

double kde_density(const std::vector<std::vector<double>>& samples, double h, const std::vector<double>& s) {
    const std::size_t l = s.size();
    long double sum = 0.0L;
    for (const auto& x : samples) {
        long double d2 = 0.0L;
        for (std::size_t k = 0; k < l; ++k) {
            const long double d = static_cast<long double>(x[k]) - s[k];
            d2 += d * d;
        }
        sum += std::exp(-d2 / (2.0L * h * h));
    }
    const long double norm = static_cast<long double>(samples.size()) *
                             std::pow(2.0L * std::numbers::pi_v<long double>, static_cast<long double>(l) / 2.0L) *
                             std::pow(static_cast<long double>(h), static_cast<long double>(l));
    return static_cast<double>(sum / norm);
}

Eigen jacobi_eigen(Matrix a, double tol, int max_sweeps) {
    const std::size_t n = a.size();
    Matrix v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                total += a[i][j] * a[i][j];
                if (i != j) off += a[i][j] * a[i][j];
            }
        }
        if (off <= tol * tol * std::max(total, 1e-300)) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    Eigen out;
    out.vectors.assign(n, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        out.values.push_back(a[order[j]][order[j]]);
        for (std::size_t i = 0; i < n; ++i) out.vectors[i][j] = v[i][order[j]];
    }
    return out;
}

Matrix covariance(const std::vector<std::vector<double>>& X) {
    const std::size_t n = X.size(), d = X[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& x : X)
        for (std::size_t k = 0; k < d; ++k) mean[k] += x[k] / static_cast<double>(n);
    Matrix c(d, std::vector<double>(d, 0.0));
    for (const auto& x : X)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]);
    for (auto& row : c)
        for (auto& v : row) v /= static_cast<double>(n - 1);
    return c;
}

namespace {

// Projection onto {0 ≤ α ≤ C, Σ y_i α_i = 0}: α_i = clip(v_i − μ y_i),
// with μ found by bisection on the monotone constraint residual.
std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y, double C) {
    const auto residual = [&](double mu) {
        double r = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) r += y[i] * std::clamp(v[i] - mu * y[i], 0.0, C);
        return r;
    };
    double lo = -1.0, hi = 1.0;
    while (residual(lo) < 0) lo *= 2;
    while (residual(hi) > 0) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) > 0 ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i] - mu * y[i], 0.0, C);
    return out;
}

}  // namespace

double svm_primal(const std::vector<std::vector<double>>& X, const std::vector<int>& y, double C,
                  const std::vector<double>& w, double b) {
    double obj = 0.0;
    for (double v : w) obj += 0.5 * v * v;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double f = b;
        for (std::size_t k = 0; k < w.size(); ++k) f += w[k] * X[i][k];
        obj += C * std::max(0.0, 1.0 - y[i] * f);
    }
    return obj;
}

LinearSvm dual_qp_linear_svm(const std::vector<std::vector<double>>& X, const std::vector<int>& y, double C,
                             std::size_t max_iterations, double tol) {
    const std::size_t n = X.size(), d = X[0].size();
    Matrix Q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double k = 0.0;
            for (std::size_t t = 0; t < d; ++t) k += X[i][t] * X[j][t];
            Q[i][j] = y[i] * y[j] * k;
        }
    // Lipschitz constant by power iteration.
    std::vector<double> z(n, 1.0), qz(n);
    double L = 1.0;
    for (int it = 0; it < 500; ++it) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            qz[i] = 0.0;
            for (std::size_t j = 0; j < n; ++j) qz[i] += Q[i][j] * z[j];
            nrm += qz[i] * qz[i];
        }
        nrm = std::sqrt(nrm);
        L = nrm;
        for (std::size_t i = 0; i < n; ++i) z[i] = qz[i] / nrm;
    }
    L *= 1.01;

    std::vector<double> alpha(n, 0.0), prev = alpha, mom = alpha, grad(n), step(n);
    double t = 1.0;
    LinearSvm out;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = -1.0;
            for (std::size_t j = 0; j < n; ++j) grad[i] += Q[i][j] * mom[j];
            step[i] = mom[i] - grad[i] / L;
        }
        prev = alpha;
        alpha = project(step, y, C);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mom[i] = alpha[i] + ((t - 1.0) / t_next) * (alpha[i] - prev[i]);
            change = std::max(change, std::abs(alpha[i] - prev[i]));
        }
        t = t_next;
        out.iterations = it + 1;
        if (change < tol * std::max(1.0, C) && it > 10) break;
    }
    out.alpha = alpha;
    out.w.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) out.w[k] += alpha[i] * y[i] * X[i][k];

    // The primal is convex piecewise linear in b with kinks at y_i − w·x_i.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double wx = 0.0;
        for (std::size_t k = 0; k < d; ++k) wx += out.w[k] * X[i][k];
        const double b = y[i] - wx;
        const double obj = svm_primal(X, y, C, out.w, b);
        if (obj < best) {
            best = obj;
            out.b = b;
        }
    }
    return out;
}

double average_precision(std::vector<std::pair<std::string, std::pair<double, int>>> items) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second.first != b.second.first) return a.second.first > b.second.first;
        return a.first < b.first;
    });
    const std::size_t n = items.size();
    std::vector<double> precision(n);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < n; ++j) {
        hits += items[j].second.second == 1;
        precision[j] = static_cast<double>(hits) / static_cast<double>(j + 1);
    }
    if (hits == 0) throw std::runtime_error("no positives");
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (items[r].second.second != 1) continue;
        double env = 0.0;
        for (std::size_t j = r; j < n; ++j) env = std::max(env, precision[j]);
        sum += env;
    }
    return sum / static_cast<double>(hits);
}

std::vector<double> central_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double segment_residual(const std::vector<double>& p, const std::vector<double>& a, const std::vector<double>& b) {
    double ab2 = 0.0, t = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        ab2 += (b[k] - a[k]) * (b[k] - a[k]);
        t += (p[k] - a[k]) * (b[k] - a[k]);
    }
    t = ab2 > 0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
    double r = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double q = a[k] + t * (b[k] - a[k]) - p[k];
        r += q * q;
    }
    return std::sqrt(r);
}

}  // namespace oracle
