#pragma once

#include "cptrank/cp_model.hpp"
#include "cptrank/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cptrank {

/// Knobs shared by the ALS and Levenberg-Marquardt solvers and by the
/// multi-start driver.
struct SolverConfig {
    int max_iters = 200;
    double rel_fit_tol = 1e-10;  ///< stop when the relative drop of the Frobenius error is below this
    double abs_fit_tol = 1e-12;  ///< stop when the Frobenius error itself is below this
    double lm_damping_init = 1e-2;
    double lm_damping_grow = 10.0;
    double lm_damping_shrink = 0.1;
    int n_random_starts = 10;
    bool use_nvec_start = true;
    std::uint64_t seed = 42;

    /// Throws StructuralError when a field is outside its documented range.
    void validate() const;

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Damping at which LM gives up looking for a descent step.
inline constexpr double kMaxDamping = 1e12;

/// Relative singular-value cutoff of the ALS pseudo-inverse.
inline constexpr double kPinvCutoff = 1e-12;

enum class StartKind { random, nvec, warm };

struct StartInfo {
    StartKind kind = StartKind::random;
    std::size_t index = 0;  ///< position in the multi-start sequence

    friend bool operator==(const StartInfo&, const StartInfo&) = default;
};

[[nodiscard]] std::string to_string(StartInfo start);

struct FitResult {
    CPModel model;
    double frob_error = 0.0;
    double max_error = 0.0;
    int iterations = 0;
    bool converged = false;
    StartInfo start;
    std::vector<double> history;  ///< Frobenius error at the start and after each ALS sweep / accepted LM step
};

/// Random source for initializers. mt19937_64 output is fixed by the
/// standard; uniform() maps the top 53 bits to [0,1) so draws are identical
/// on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// Alternating least squares. Each mode update is the exact least-squares
/// solution given the other factors (pseudo-inverse of the Hadamard Gram
/// matrix), so the Frobenius error never increases across a sweep.
[[nodiscard]] FitResult als_decompose(const Tensor& target, std::size_t rank, const CPModel& init,
                                      const SolverConfig& config);

/// Levenberg-Marquardt on f(θ) = ½‖reconstruct(θ) − target‖² over all factor
/// entries. Throws SolverError if the starting residual is not finite.
[[nodiscard]] FitResult lm_decompose(const Tensor& target, std::size_t rank, const CPModel& init,
                                     const SolverConfig& config);

/// Leading left singular vectors of every mode unfolding, padded with
/// unit-norm random columns where the unfolding has fewer than `rank`
/// nonzero singular values.
[[nodiscard]] CPModel nvec_init(const Tensor& target, std::size_t rank, std::uint64_t seed);

/// Factor entries i.i.d. uniform on [0,1].
[[nodiscard]] CPModel random_init(const Dims& dims, std::size_t rank, Rng& rng);

/// Appends one term whose entries are uniform on [0, scale].
[[nodiscard]] CPModel extend_rank(const CPModel& base, Rng& rng, double scale);

/// Runs lm_decompose from every configured start (random start i seeded with
/// seed + i, then the nvec start) and keeps the result with the smallest
/// max error, ties broken by Frobenius error and then start order.
///
/// With `warm` set, one more start extends that model by a small random term;
/// the unextended model itself also competes, so the returned max error never
/// exceeds the warm model's.
[[nodiscard]] FitResult multi_start_decompose(const Tensor& target, std::size_t rank, const SolverConfig& config,
                                              const std::optional<CPModel>& warm = std::nullopt);

/// Building blocks of the LM step, exposed for verification.
namespace lm {

/// Parameter vector: factor 0 column-major, then factor 1, ...
[[nodiscard]] Vector flatten(const CPModel& model);
[[nodiscard]] CPModel unflatten(const Vector& theta, const Dims& dims, std::size_t rank);

/// ½‖reconstruct(model) − target‖².
[[nodiscard]] double objective(const Tensor& target, const CPModel& model);

/// Jᵀ·residual, in flatten() order. Model weights must be all ones.
[[nodiscard]] Vector gradient(const Tensor& target, const CPModel& model);

/// JᵀJ assembled block-wise from factor Gram matrices.
[[nodiscard]] Matrix gauss_newton_matrix(const CPModel& model);

}  // namespace lm

}  // namespace cptrank
