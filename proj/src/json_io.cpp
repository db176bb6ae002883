#include "cptrank/json_io.hpp"

#include "cptrank/error.hpp"

namespace cptrank {

Json tensor_to_json(const Tensor& t) {
    return Json{{"dims", t.dims()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

Tensor tensor_from_json(const Json& j) {
    try {
        return Tensor::from_flat(j.at("dims").get<Dims>(), j.at("data").get<std::vector<double>>());
    } catch (const Json::exception& e) {
        throw StructuralError(std::string("malformed tensor JSON: ") + e.what());
    }
}

Json model_to_json(const CPModel& m) {
    Json factors = Json::array();
    for (const auto& f : m.factors()) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(f.size()));
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            for (Eigen::Index t = 0; t < f.cols(); ++t) flat.push_back(f(i, t));
        }
        factors.push_back(std::move(flat));
    }
    return Json{{"dims", m.dims()},
                {"rank", m.rank()},
                {"weights", std::vector<double>(m.weights().begin(), m.weights().end())},
                {"factors", std::move(factors)}};
}

CPModel model_from_json(const Json& j) {
    try {
        const auto dims = j.at("dims").get<Dims>();
        const auto rank = j.at("rank").get<std::size_t>();
        const auto& factors = j.at("factors");
        if (factors.size() != dims.size()) throw StructuralError("model JSON: factor count does not match dims");
        std::vector<Matrix> mats;
        for (std::size_t mode = 0; mode < dims.size(); ++mode) {
            const auto flat = factors[mode].get<std::vector<double>>();
            if (flat.size() != dims[mode] * rank) {
                throw StructuralError("model JSON: factor " + std::to_string(mode) + " has " +
                                      std::to_string(flat.size()) + " entries, expected " +
                                      std::to_string(dims[mode] * rank));
            }
            Matrix f(static_cast<Eigen::Index>(dims[mode]), static_cast<Eigen::Index>(rank));
            for (std::size_t i = 0; i < dims[mode]; ++i) {
                for (std::size_t t = 0; t < rank; ++t) {
                    f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = flat[i * rank + t];
                }
            }
            mats.push_back(std::move(f));
        }
        Vector w;
        if (j.contains("weights")) {
            const auto ws = j.at("weights").get<std::vector<double>>();
            w = Eigen::Map<const Vector>(ws.data(), static_cast<Eigen::Index>(ws.size()));
        }
        return CPModel(std::move(mats), std::move(w));
    } catch (const Json::exception& e) {
        throw StructuralError(std::string("malformed model JSON: ") + e.what());
    }
}

}  // namespace cptrank
