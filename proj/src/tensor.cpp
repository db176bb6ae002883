#include "cptrank/tensor.hpp"

#include "cptrank/error.hpp"

#include <cmath>
#include <numeric>

namespace cptrank {

std::size_t element_count(const Dims& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string format_dims(const Dims& dims) {
    std::string out;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        if (j != 0) out += 'x';
        out += std::to_string(dims[j]);
    }
    return out;
}

Tensor Tensor::from_flat(Dims dims, std::vector<double> data) {
    if (dims.empty()) throw StructuralError("tensor needs at least one mode");
    for (std::size_t d : dims) {
        if (d == 0) throw StructuralError("tensor dimension must be >= 1, got dims " + format_dims(dims));
    }
    const std::size_t expected = element_count(dims);
    if (data.size() != expected) {
        throw StructuralError("tensor data length mismatch: dims " + format_dims(dims) + " need " +
                              std::to_string(expected) + " entries, got " + std::to_string(data.size()));
    }
    return Tensor(std::move(dims), std::move(data));
}

Tensor Tensor::zeros(Dims dims) {
    const std::size_t n = element_count(dims);
    return from_flat(std::move(dims), std::vector<double>(n, 0.0));
}

std::size_t Tensor::offset(std::span<const std::size_t> index) const {
    if (index.size() != dims_.size()) {
        throw StructuralError("index has " + std::to_string(index.size()) + " components, tensor order is " +
                              std::to_string(dims_.size()));
    }
    std::size_t off = 0;
    for (std::size_t j = 0; j < dims_.size(); ++j) {
        if (index[j] >= dims_[j]) throw StructuralError("index out of range in mode " + std::to_string(j));
        off = off * dims_[j] + index[j];
    }
    return off;
}

Tensor rank_one(std::span<const std::vector<double>> vectors) {
    if (vectors.empty()) throw StructuralError("rank_one needs at least one vector");
    Dims dims;
    for (const auto& v : vectors) {
        if (v.empty()) throw StructuralError("rank_one vectors must be nonempty");
        dims.push_back(v.size());
    }
    // Build by successive Kronecker expansion; last vector ends up fastest.
    std::vector<double> data{1.0};
    for (const auto& v : vectors) {
        std::vector<double> next;
        next.reserve(data.size() * v.size());
        for (double a : data) {
            for (double b : v) next.push_back(a * b);
        }
        data = std::move(next);
    }
    return Tensor::from_flat(std::move(dims), std::move(data));
}

namespace {

void require_same_dims(const Tensor& a, const Tensor& b, const char* op) {
    if (a.dims() != b.dims()) {
        throw StructuralError(std::string(op) + ": dims mismatch " + format_dims(a.dims()) + " vs " +
                              format_dims(b.dims()));
    }
}

}  // namespace

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_dims(a, b, "max_abs_diff");
    double best = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) best = std::max(best, std::abs(x[i] - y[i]));
    return best;
}

double frobenius_dist(const Tensor& a, const Tensor& b) {
    require_same_dims(a, b, "frobenius_dist");
    double sum = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

namespace {

struct ModeSplit {
    std::size_t left;   // product of dims before the mode
    std::size_t n;      // the mode's own dimension
    std::size_t right;  // product of dims after the mode
};

ModeSplit split_at(const Dims& dims, std::size_t mode) {
    if (mode >= dims.size()) {
        throw StructuralError("mode " + std::to_string(mode) + " out of range for order " +
                              std::to_string(dims.size()));
    }
    ModeSplit s{1, dims[mode], 1};
    for (std::size_t j = 0; j < mode; ++j) s.left *= dims[j];
    for (std::size_t j = mode + 1; j < dims.size(); ++j) s.right *= dims[j];
    return s;
}

}  // namespace

Matrix unfold(const Tensor& t, std::size_t mode) {
    const ModeSplit s = split_at(t.dims(), mode);
    Matrix out(s.n, s.left * s.right);
    auto data = t.data();
    for (std::size_t l = 0; l < s.left; ++l) {
        for (std::size_t i = 0; i < s.n; ++i) {
            const double* src = data.data() + (l * s.n + i) * s.right;
            for (std::size_t r = 0; r < s.right; ++r) out(i, l * s.right + r) = src[r];
        }
    }
    return out;
}

Tensor fold(const Matrix& m, std::size_t mode, const Dims& dims) {
    const ModeSplit s = split_at(dims, mode);
    if (static_cast<std::size_t>(m.rows()) != s.n || static_cast<std::size_t>(m.cols()) != s.left * s.right) {
        throw StructuralError("fold: matrix shape does not match dims " + format_dims(dims));
    }
    std::vector<double> data(element_count(dims));
    for (std::size_t l = 0; l < s.left; ++l) {
        for (std::size_t i = 0; i < s.n; ++i) {
            double* dst = data.data() + (l * s.n + i) * s.right;
            for (std::size_t r = 0; r < s.right; ++r) dst[r] = m(i, l * s.right + r);
        }
    }
    return Tensor::from_flat(dims, std::move(data));
}

Matrix khatri_rao(std::span<const Matrix> matrices) {
    if (matrices.empty()) throw StructuralError("khatri_rao needs at least one matrix");
    const Eigen::Index r = matrices.front().cols();
    for (const auto& m : matrices) {
        if (m.cols() != r) {
            throw StructuralError("khatri_rao: column count mismatch (" + std::to_string(r) + " vs " +
                                  std::to_string(m.cols()) + ")");
        }
    }
    Matrix out = matrices.front();
    for (std::size_t j = 1; j < matrices.size(); ++j) {
        const Matrix& b = matrices[j];
        Matrix next(out.rows() * b.rows(), r);
        for (Eigen::Index t = 0; t < r; ++t) {
            for (Eigen::Index i = 0; i < out.rows(); ++i) {
                next.col(t).segment(i * b.rows(), b.rows()) = out(i, t) * b.col(t);
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace cptrank
