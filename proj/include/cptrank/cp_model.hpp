#pragma once

#include "cptrank/tensor.hpp"

#include <cstddef>
#include <vector>

namespace cptrank {

/// Sum of `rank` rank-one terms. Factor j is an n_j x rank matrix whose
/// column t holds term t's vector for mode j; weights scale whole terms.
class CPModel {
public:
    CPModel() = default;

    /// Weights default to all ones when left empty. Throws StructuralError if
    /// the factors disagree on column count or the weight vector length.
    explicit CPModel(std::vector<Matrix> factors, Vector weights = {});

    static CPModel zeros(const Dims& dims, std::size_t rank);

    [[nodiscard]] const Dims& dims() const { return dims_; }
    [[nodiscard]] std::size_t order() const { return dims_.size(); }
    [[nodiscard]] std::size_t rank() const { return rank_; }
    [[nodiscard]] const std::vector<Matrix>& factors() const { return factors_; }
    [[nodiscard]] const Matrix& factor(std::size_t mode) const { return factors_.at(mode); }
    [[nodiscard]] const Vector& weights() const { return weights_; }

    /// Weights folded into the first factor; all weights become 1.
    [[nodiscard]] CPModel absorbed() const;

    /// Unit-norm factor columns with the scale carried by the weights.
    /// Zero columns stay zero and get weight 0.
    [[nodiscard]] CPModel normalized() const;

private:
    Dims dims_;
    std::size_t rank_ = 0;
    std::vector<Matrix> factors_;
    Vector weights_;
};

/// Sum over terms of weight_t * (a_1t ⊗ ... ⊗ a_kt).
[[nodiscard]] Tensor reconstruct(const CPModel& model);

}  // namespace cptrank
