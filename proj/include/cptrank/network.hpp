#pragma once

#include "cptrank/tensor.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cptrank {

/// One discrete variable with its conditional probability table.
struct NodeSpec {
    std::string name;
    std::vector<std::string> states;
    std::vector<std::string> parents;  ///< as written in the potential header
    std::vector<double> cpt_data;      ///< file order: last parent fastest, child states innermost

    [[nodiscard]] std::size_t cardinality() const { return states.size(); }

    friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

/// A parsed Bayesian network. Node order is the order of the node blocks.
class Network {
public:
    Network() = default;

    /// Checks the structural invariants (unique names, known parents, CPT
    /// lengths). Probability normalisation is checked by the loaders.
    Network(std::string name, std::vector<NodeSpec> nodes);

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const std::vector<NodeSpec>& nodes() const { return nodes_; }
    [[nodiscard]] const NodeSpec* find(std::string_view node) const;
    /// Throws std::out_of_range for an unknown name.
    [[nodiscard]] const NodeSpec& node(std::string_view node) const;

    /// Cardinalities of the node's parents, in header order.
    [[nodiscard]] Dims parent_dims(const NodeSpec& node) const;

    friend bool operator==(const Network& a, const Network& b) {
        return a.name_ == b.name_ && a.nodes_ == b.nodes_;
    }

private:
    std::string name_;
    std::vector<NodeSpec> nodes_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

struct ParseOptions {
    std::string name = "network";
    double tolerance = 1e-6;           ///< allowed deviation of each child distribution from 1
    bool strict_normalization = true;  ///< false downgrades normalisation failures to warnings
    std::function<void(const std::string&)> on_warning;
};

/// Parses the HUGIN .net subset: a `net { }` header, discrete `node` blocks
/// with `states`, and one `potential ( child | parents ) { data = ...; }`
/// per node. `%` starts a comment; other attributes are skipped.
[[nodiscard]] Network parse_net(std::string_view text, const ParseOptions& options = {});

/// Emits a document that parse_net() reads back to an identical Network.
[[nodiscard]] std::string write_net(const Network& net);

/// {"name":..., "nodes":[{"name","states","parents","cpt"}]}
[[nodiscard]] Network parse_network_json(std::string_view text, const ParseOptions& options = {});
[[nodiscard]] std::string write_network_json(const Network& net);

/// Reads a file; `.json` goes through the JSON reader, everything else is
/// treated as .net. The network is named after the file stem unless the
/// JSON document names it.
[[nodiscard]] Network load_network(const std::filesystem::path& path, ParseOptions options = {});

/// Throws ValidationError (or warns, per options) when a child distribution
/// is negative or does not sum to one.
void validate_cpts(const Network& net, const ParseOptions& options);

/// CPT as a tensor with dims [|parent_1|, ..., |parent_m|, |child|].
[[nodiscard]] Tensor cpt_to_tensor(const NodeSpec& node, const Network& net);

/// Nodes with at least `min_parents` parents, in network order.
[[nodiscard]] std::vector<std::reference_wrapper<const NodeSpec>> select_cpts(const Network& net,
                                                                              std::size_t min_parents);

}  // namespace cptrank
