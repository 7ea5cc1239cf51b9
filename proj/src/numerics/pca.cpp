#include "flame/numerics/pca.hpp"

#include "flame/simd/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace flame::numerics {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

PcaModel fit_pca(const PointSet& X, std::size_t components) {
    const std::size_t n = X.size();
    const std::size_t dim = X.dim();
    if (n < 2) throw ConfigError("PCA needs at least 2 points", {{"points", n}});
    if (components == 0 || components > std::min(n - 1, dim)) {
        throw ConfigError("PCA dimension " + std::to_string(components) + " outside [1, min(n-1, dim)] = [1, " +
                              std::to_string(std::min(n - 1, dim)) + "]",
                          {{"field", "pca_dim"}, {"value", components}});
    }

    const Eigen::Map<const RowMatrix> data(X.data().data(), static_cast<Eigen::Index>(n),
                                           static_cast<Eigen::Index>(dim));
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const RowMatrix centered = data.rowwise() - mean;

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(n - 1));
    cov = cov.selfadjointView<Eigen::Lower>();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw ConvergenceError("PCA eigendecomposition failed");

    const auto& values = solver.eigenvalues();  // ascending
    const auto& vectors = solver.eigenvectors();
    const double largest = std::max(values(values.size() - 1), 0.0);
    const double rank_floor = largest * static_cast<double>(dim) * std::numeric_limits<double>::epsilon() * 16.0;

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + dim);
    model.components = PointSet(components, dim);
    model.explained_variance.resize(components);
    model.total_variance = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) model.total_variance += std::max(values(i), 0.0);

    for (std::size_t c = 0; c < components; ++c) {
        const Eigen::Index col = values.size() - 1 - static_cast<Eigen::Index>(c);
        const double lambda = values(col);
        model.explained_variance[c] = lambda > rank_floor ? lambda : 0.0;

        // Sign convention: the entry of largest magnitude is positive.
        Eigen::Index pivot = 0;
        for (Eigen::Index k = 1; k < vectors.rows(); ++k) {
            if (std::abs(vectors(k, col)) > std::abs(vectors(pivot, col))) pivot = k;
        }
        const double sign = vectors(pivot, col) < 0.0 ? -1.0 : 1.0;
        auto row = model.components.row(c);
        for (std::size_t k = 0; k < dim; ++k) row[k] = sign * vectors(static_cast<Eigen::Index>(k), col);
    }
    return model;
}

Vector project(const PcaModel& model, std::span<const double> x) {
    if (x.size() != model.input_dim()) {
        throw DimensionError("projection input has dimension " + std::to_string(x.size()) + ", model expects " +
                             std::to_string(model.input_dim()));
    }
    const auto& k = simd::kernels();
    Vector centered(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) centered[i] = x[i] - model.mean[i];
    Vector out(model.output_dim());
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = k.dot(model.components.row(c).data(), centered.data(), centered.size());
    }
    return out;
}

PointSet project_all(const PcaModel& model, const PointSet& X) {
    PointSet out(0, model.output_dim());
    for (std::size_t i = 0; i < X.size(); ++i) out.push_back(project(model, X.row(i)));
    return out;
}

}  // namespace flame::numerics
