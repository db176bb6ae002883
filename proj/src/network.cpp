#include "cptrank/network.hpp"

#include "cptrank/error.hpp"
#include "cptrank/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cptrank {

Network::Network(std::string name, std::vector<NodeSpec> nodes) : name_(std::move(name)), nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const NodeSpec& n = nodes_[i];
        if (n.states.empty()) throw StructuralError("node '" + n.name + "' has no states");
        if (!index_.emplace(n.name, i).second) throw StructuralError("duplicate node '" + n.name + "'");
    }
    for (const NodeSpec& n : nodes_) {
        std::size_t expected = n.cardinality();
        for (const std::string& p : n.parents) {
            const NodeSpec* parent = find(p);
            if (parent == nullptr) {
                throw StructuralError("node '" + n.name + "' names unknown parent '" + p + "'");
            }
            expected *= parent->cardinality();
        }
        if (n.cpt_data.size() != expected) {
            throw StructuralError("node '" + n.name + "' has " + std::to_string(n.cpt_data.size()) +
                                  " CPT entries, expected " + std::to_string(expected));
        }
    }
}

const NodeSpec* Network::find(std::string_view node) const {
    auto it = index_.find(node);
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

const NodeSpec& Network::node(std::string_view node) const {
    const NodeSpec* n = find(node);
    if (n == nullptr) throw std::out_of_range("no node named '" + std::string(node) + "'");
    return *n;
}

Dims Network::parent_dims(const NodeSpec& node) const {
    Dims dims;
    for (const std::string& p : node.parents) dims.push_back(this->node(p).cardinality());
    return dims;
}

void validate_cpts(const Network& net, const ParseOptions& options) {
    for (const NodeSpec& n : net.nodes()) {
        const std::size_t card = n.cardinality();
        const std::size_t configs = n.cpt_data.size() / card;
        for (std::size_t c = 0; c < configs; ++c) {
            double sum = 0.0;
            bool negative = false;
            for (std::size_t s = 0; s < card; ++s) {
                const double p = n.cpt_data[c * card + s];
                negative = negative || p < 0.0 || !std::isfinite(p);
                sum += p;
            }
            if (!negative && std::abs(sum - 1.0) <= options.tolerance) continue;
            std::ostringstream msg;
            msg.precision(10);
            msg << "node '" << n.name << "' configuration " << c << ": "
                << (negative ? "negative or non-finite probability" : "probabilities sum to ") ;
            if (!negative) msg << sum;
            if (options.strict_normalization || negative) throw ValidationError(n.name, c, msg.str());
            if (options.on_warning) options.on_warning(msg.str());
        }
    }
}

Tensor cpt_to_tensor(const NodeSpec& node, const Network& net) {
    Dims dims = net.parent_dims(node);
    dims.push_back(node.cardinality());
    // HUGIN data order already is row-major over [parents..., child].
    return Tensor::from_flat(std::move(dims), node.cpt_data);
}

std::vector<std::reference_wrapper<const NodeSpec>> select_cpts(const Network& net, std::size_t min_parents) {
    std::vector<std::reference_wrapper<const NodeSpec>> out;
    for (const NodeSpec& n : net.nodes()) {
        if (n.parents.size() >= min_parents) out.emplace_back(n);
    }
    return out;
}

Network parse_network_json(std::string_view text, const ParseOptions& options) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(0, "", std::string("invalid JSON: ") + e.what());
    }
    std::vector<NodeSpec> nodes;
    try {
        for (const Json& jn : doc.at("nodes")) {
            NodeSpec n;
            n.name = jn.at("name").get<std::string>();
            n.states = jn.at("states").get<std::vector<std::string>>();
            n.parents = jn.value("parents", std::vector<std::string>{});
            n.cpt_data = jn.at("cpt").get<std::vector<double>>();
            nodes.push_back(std::move(n));
        }
    } catch (const Json::exception& e) {
        throw ParseError(0, "", std::string("malformed network JSON: ") + e.what());
    }
    Network net(doc.value("name", options.name), std::move(nodes));
    validate_cpts(net, options);
    return net;
}

std::string write_network_json(const Network& net) {
    Json nodes = Json::array();
    for (const NodeSpec& n : net.nodes()) {
        nodes.push_back({{"name", n.name}, {"states", n.states}, {"parents", n.parents}, {"cpt", n.cpt_data}});
    }
    return Json{{"name", net.name()}, {"nodes", std::move(nodes)}}.dump(2);
}

Network load_network(const std::filesystem::path& path, ParseOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    options.name = path.stem().string();
    if (path.extension() == ".json") return parse_network_json(buf.str(), options);
    return parse_net(buf.str(), options);
}

}  // namespace cptrank
