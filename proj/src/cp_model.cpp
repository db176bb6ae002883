#include "cptrank/cp_model.hpp"

#include "cptrank/error.hpp"

namespace cptrank {

CPModel::CPModel(std::vector<Matrix> factors, Vector weights) : factors_(std::move(factors)) {
    if (factors_.empty()) throw StructuralError("CP model needs at least one factor matrix");
    rank_ = static_cast<std::size_t>(factors_.front().cols());
    if (rank_ == 0) throw StructuralError("CP model rank must be >= 1");
    for (const auto& f : factors_) {
        if (static_cast<std::size_t>(f.cols()) != rank_) {
            throw StructuralError("CP factor matrices disagree on rank");
        }
        if (f.rows() == 0) throw StructuralError("CP factor matrix has no rows");
        dims_.push_back(static_cast<std::size_t>(f.rows()));
    }
    if (weights.size() == 0) {
        weights_ = Vector::Ones(static_cast<Eigen::Index>(rank_));
    } else if (static_cast<std::size_t>(weights.size()) != rank_) {
        throw StructuralError("CP weight vector length " + std::to_string(weights.size()) +
                              " does not match rank " + std::to_string(rank_));
    } else {
        weights_ = std::move(weights);
    }
}

CPModel CPModel::zeros(const Dims& dims, std::size_t rank) {
    std::vector<Matrix> factors;
    for (std::size_t n : dims) {
        factors.push_back(Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank)));
    }
    return CPModel(std::move(factors));
}

CPModel CPModel::absorbed() const {
    std::vector<Matrix> f = factors_;
    f.front() = f.front() * weights_.asDiagonal();
    return CPModel(std::move(f));
}

CPModel CPModel::normalized() const {
    std::vector<Matrix> f = factors_;
    Vector w = weights_;
    for (auto& m : f) {
        for (Eigen::Index t = 0; t < m.cols(); ++t) {
            const double norm = m.col(t).norm();
            if (norm > 0.0) {
                m.col(t) /= norm;
                w(t) *= norm;
            } else {
                w(t) = 0.0;
            }
        }
    }
    return CPModel(std::move(f), std::move(w));
}

Tensor reconstruct(const CPModel& model) {
    const auto& f = model.factors();
    // Mode-0 unfolding of a row-major tensor is its flat data, row by row.
    Matrix first = f.front() * model.weights().asDiagonal();
    Matrix unfolded;
    if (f.size() == 1) {
        unfolded = first.rowwise().sum();
    } else {
        unfolded = first * khatri_rao(std::span<const Matrix>(f).subspan(1)).transpose();
    }
    std::vector<double> data(static_cast<std::size_t>(unfolded.size()));
    const Eigen::Index cols = unfolded.cols();
    for (Eigen::Index i = 0; i < unfolded.rows(); ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) data[static_cast<std::size_t>(i * cols + c)] = unfolded(i, c);
    }
    return Tensor::from_flat(model.dims(), std::move(data));
}

}  // namespace cptrank
