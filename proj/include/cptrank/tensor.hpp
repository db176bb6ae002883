#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace cptrank {

using Dims = std::vector<std::size_t>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Product of all dimensions (1 for an empty list).
[[nodiscard]] std::size_t element_count(const Dims& dims);

/// Renders dims as "3x3x4x3".
[[nodiscard]] std::string format_dims(const Dims& dims);

/// Dense order-k tensor of doubles.
///
/// Storage is row-major over the dimension list: the last index varies
/// fastest. unfold(), khatri_rao() and the network parser all share this
/// linearization.
class Tensor {
public:
    Tensor() = default;

    /// Throws StructuralError when data.size() != product(dims) or a
    /// dimension is zero.
    static Tensor from_flat(Dims dims, std::vector<double> data);
    static Tensor zeros(Dims dims);

    [[nodiscard]] const Dims& dims() const { return dims_; }
    [[nodiscard]] std::size_t order() const { return dims_.size(); }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] std::span<const double> data() const { return data_; }

    [[nodiscard]] std::size_t offset(std::span<const std::size_t> index) const;
    [[nodiscard]] double operator()(std::span<const std::size_t> index) const {
        return data_[offset(index)];
    }
    [[nodiscard]] double at(std::initializer_list<std::size_t> index) const {
        return (*this)(std::span<const std::size_t>(index.begin(), index.size()));
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Tensor(Dims dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data)) {}

    Dims dims_;
    std::vector<double> data_;
};

/// Outer product v_1 ⊗ ... ⊗ v_k.
[[nodiscard]] Tensor rank_one(std::span<const std::vector<double>> vectors);

/// max over all indices of |a - b|.
[[nodiscard]] double max_abs_diff(const Tensor& a, const Tensor& b);

/// sqrt of the summed squared entry differences.
[[nodiscard]] double frobenius_dist(const Tensor& a, const Tensor& b);

/// Mode-m matricization, n_m x (prod of other dims). Columns enumerate the
/// remaining modes in their original order, last one fastest.
[[nodiscard]] Matrix unfold(const Tensor& t, std::size_t mode);

/// Inverse of unfold for a tensor of the given dims.
[[nodiscard]] Tensor fold(const Matrix& m, std::size_t mode, const Dims& dims);

/// Column-wise Kronecker product M_1 ⊙ M_2 ⊙ ... with the last matrix's row
/// index varying fastest, which is the column order used by unfold().
[[nodiscard]] Matrix khatri_rao(std::span<const Matrix> matrices);

}  // namespace cptrank
