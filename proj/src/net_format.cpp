#include "cptrank/error.hpp"
#include "cptrank/network.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>

namespace cptrank {

namespace {

enum class Tok { ident, string, number, punct, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t line = 0;
    double number = 0.0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token t;
        t.line = line_;
        if (pos_ >= src_.size()) return t;
        const char c = src_[pos_];
        if (c == '"') return read_string(t);
        if (std::string_view("(){}=;|").find(c) != std::string_view::npos) {
            t.kind = Tok::punct;
            t.text = std::string(1, c);
            ++pos_;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') return read_number(t);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                                          src_[pos_] == '.' || src_[pos_] == '-')) {
                ++pos_;
            }
            t.kind = Tok::ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        throw ParseError(line_, std::string(1, c), "unexpected character");
    }

private:
    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    Token read_string(Token t) {
        ++pos_;
        t.kind = Tok::string;
        while (true) {
            if (pos_ >= src_.size()) throw ParseError(t.line, "\"" + t.text, "unterminated string");
            const char c = src_[pos_++];
            if (c == '"') break;
            if (c == '\\' && pos_ < src_.size()) {
                t.text += src_[pos_++];
                continue;
            }
            if (c == '\n') ++line_;
            t.text += c;
        }
        return t;
    }

    Token read_number(Token t) {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                                      src_[pos_] == '-' || src_[pos_] == '+')) {
            ++pos_;
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        const char* first = t.text.data();
        if (*first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, t.text.data() + t.text.size(), t.number);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
            throw ParseError(t.line, t.text, "malformed number");
        }
        t.kind = Tok::number;
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

/// Attribute value: scalar token or parenthesised list.
struct Value {
    Token scalar;
    bool is_list = false;
    std::vector<Value> items;
    std::size_t line = 0;
};

struct RawPotential {
    std::string child;
    std::vector<std::string> parents;
    std::optional<Value> data;
    std::size_t line = 0;
};

struct RawNode {
    NodeSpec spec;
    std::size_t line = 0;
    bool has_states = false;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) { advance(); }

    Network parse(const ParseOptions& options) {
        if (is_ident("class")) throw UnsupportedFeature(tok_.line, tok_.text, "object-oriented class networks are not supported");
        expect_ident("net");
        skip_block();
        while (tok_.kind != Tok::end) {
            if (is_ident("node") || is_ident("discrete")) {
                parse_node();
            } else if (is_ident("potential")) {
                parse_potential();
            } else if (is_ident("continuous") || is_ident("decision") || is_ident("utility") ||
                       is_ident("function") || is_ident("instance") || is_ident("temporal")) {
                throw UnsupportedFeature(tok_.line, tok_.text, "unsupported node kind");
            } else {
                fail("expected 'node' or 'potential'");
            }
        }
        return assemble(options);
    }

private:
    void advance() { tok_ = lex_.next(); }
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(tok_.line, tok_.kind == Tok::end ? "<end of input>" : tok_.text, what);
    }
    bool is_ident(std::string_view s) const { return tok_.kind == Tok::ident && tok_.text == s; }
    bool is_punct(char c) const { return tok_.kind == Tok::punct && tok_.text[0] == c; }
    void expect_punct(char c) {
        if (!is_punct(c)) fail(std::string("expected '") + c + "'");
        advance();
    }
    void expect_ident(std::string_view s) {
        if (!is_ident(s)) fail("expected '" + std::string(s) + "'");
        advance();
    }
    std::string take_name() {
        if (tok_.kind != Tok::ident) fail("expected a name");
        std::string n = tok_.text;
        advance();
        return n;
    }

    Value parse_value() {
        Value v;
        v.line = tok_.line;
        if (is_punct('(')) {
            advance();
            v.is_list = true;
            while (!is_punct(')')) {
                if (tok_.kind == Tok::end) fail("unterminated list");
                v.items.push_back(parse_value());
            }
            advance();
            return v;
        }
        if (tok_.kind == Tok::punct || tok_.kind == Tok::end) fail("expected a value");
        v.scalar = tok_;
        advance();
        return v;
    }

    /// Reads `{ name = value; ... }` and hands each attribute to `on_attr`.
    template <typename F>
    void parse_attributes(F&& on_attr) {
        expect_punct('{');
        while (!is_punct('}')) {
            if (tok_.kind == Tok::end) fail("unterminated block");
            const Token key = tok_;
            const std::string name = take_name();
            expect_punct('=');
            Value v = parse_value();
            expect_punct(';');
            on_attr(key, name, std::move(v));
        }
        advance();
    }

    void skip_block() {
        parse_attributes([](const Token&, const std::string&, Value) {});
    }

    void parse_node() {
        if (is_ident("discrete")) advance();
        RawNode node;
        node.line = tok_.line;
        expect_ident("node");
        node.spec.name = take_name();
        parse_attributes([&](const Token& key, const std::string& name, Value v) {
            if (name == "states") {
                if (!v.is_list) throw ParseError(key.line, name, "states must be a parenthesised list");
                for (const Value& s : v.items) {
                    if (s.is_list || s.scalar.kind != Tok::string) {
                        throw ParseError(s.line, s.scalar.text, "state labels must be quoted strings");
                    }
                    node.spec.states.push_back(s.scalar.text);
                }
                node.has_states = true;
            }
        });
        if (!node.has_states || node.spec.states.empty()) {
            throw ParseError(node.line, node.spec.name, "node has no states");
        }
        if (!node_index_.emplace(node.spec.name, nodes_.size()).second) {
            throw ParseError(node.line, node.spec.name, "duplicate node");
        }
        nodes_.push_back(std::move(node));
    }

    void parse_potential() {
        RawPotential pot;
        pot.line = tok_.line;
        advance();
        expect_punct('(');
        pot.child = take_name();
        if (tok_.kind == Tok::ident) throw UnsupportedFeature(tok_.line, tok_.text, "joint potentials are not supported");
        if (is_punct('|')) {
            advance();
            while (tok_.kind == Tok::ident) pot.parents.push_back(take_name());
        }
        expect_punct(')');
        parse_attributes([&](const Token& key, const std::string& name, Value v) {
            if (name == "data") {
                pot.data = std::move(v);
            } else if (name == "model_nodes" || name == "model_data") {
                throw UnsupportedFeature(key.line, name, "functional potentials are not supported");
            }
        });
        potentials_.push_back(std::move(pot));
    }

    /// Checks the nesting of `data` against [parent cards..., child card] and
    /// appends the numbers in textual order. A flat list is accepted as is.
    void flatten_data(const Value& v, const Dims& shape, std::size_t depth, bool nested, std::vector<double>& out) const {
        if (!v.is_list) {
            if (v.scalar.kind != Tok::number) throw ParseError(v.line, v.scalar.text, "expected a probability");
            if (nested && depth != shape.size()) throw ParseError(v.line, v.scalar.text, "data nesting is shallower than the parent count");
            out.push_back(v.scalar.number);
            return;
        }
        if (nested) {
            if (depth >= shape.size()) throw ParseError(v.line, "(", "data nesting is deeper than the parent count");
            if (v.items.size() != shape[depth]) {
                throw ParseError(v.line, "(", "data list has " + std::to_string(v.items.size()) + " entries at depth " +
                                                  std::to_string(depth) + ", expected " + std::to_string(shape[depth]));
            }
        }
        for (const Value& item : v.items) flatten_data(item, shape, depth + 1, nested, out);
    }

    Network assemble(const ParseOptions& options) {
        std::set<std::string> seen;
        for (RawPotential& pot : potentials_) {
            auto it = node_index_.find(pot.child);
            if (it == node_index_.end()) throw ParseError(pot.line, pot.child, "potential for unknown node");
            if (!seen.insert(pot.child).second) throw ParseError(pot.line, pot.child, "second potential for node");
            RawNode& node = nodes_[it->second];
            Dims shape;
            for (const std::string& p : pot.parents) {
                auto pit = node_index_.find(p);
                if (pit == node_index_.end()) throw ParseError(pot.line, p, "unknown parent");
                shape.push_back(nodes_[pit->second].spec.cardinality());
            }
            shape.push_back(node.spec.cardinality());
            if (!pot.data) throw ParseError(pot.line, pot.child, "potential has no data");
            const Value& data = *pot.data;
            if (!data.is_list) throw ParseError(data.line, data.scalar.text, "data must be a parenthesised list");
            bool flat = true;
            for (const Value& item : data.items) flat = flat && !item.is_list;
            std::vector<double> values;
            flatten_data(data, shape, 0, !flat, values);
            const std::size_t expected = element_count(shape);
            if (values.size() != expected) {
                throw ParseError(data.line, pot.child, "data has " + std::to_string(values.size()) +
                                                           " entries, expected " + std::to_string(expected));
            }
            node.spec.parents = std::move(pot.parents);
            node.spec.cpt_data = std::move(values);
        }
        std::vector<NodeSpec> specs;
        for (RawNode& n : nodes_) {
            if (!seen.count(n.spec.name)) throw ParseError(n.line, n.spec.name, "node has no potential");
            specs.push_back(std::move(n.spec));
        }
        Network net(options.name, std::move(specs));
        validate_cpts(net, options);
        return net;
    }

    Lexer lex_;
    Token tok_;
    std::vector<RawNode> nodes_;
    std::map<std::string, std::size_t> node_index_;
    std::vector<RawPotential> potentials_;
};

std::string format_number(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

void write_data(std::string& out, const std::vector<double>& data, const Dims& shape, std::size_t depth,
                std::size_t& pos) {
    out += '(';
    for (std::size_t i = 0; i < shape[depth]; ++i) {
        if (depth + 1 == shape.size()) {
            if (i != 0) out += ' ';
            out += format_number(data[pos++]);
        } else {
            if (i != 0) out += "\n" + std::string(10 + depth, ' ');
            write_data(out, data, shape, depth + 1, pos);
        }
    }
    out += ')';
}

}  // namespace

Network parse_net(std::string_view text, const ParseOptions& options) { return Parser(text).parse(options); }

std::string write_net(const Network& net) {
    std::string out = "net\n{\n}\n";
    for (const NodeSpec& n : net.nodes()) {
        out += "\nnode " + n.name + "\n{\n  states = (";
        for (const std::string& s : n.states) out += " " + quote(s);
        out += " );\n}\n";
    }
    for (const NodeSpec& n : net.nodes()) {
        out += "\npotential ( " + n.name;
        if (!n.parents.empty()) {
            out += " |";
            for (const std::string& p : n.parents) out += " " + p;
        }
        out += " )\n{\n  data = ";
        Dims shape = net.parent_dims(n);
        shape.push_back(n.cardinality());
        std::size_t pos = 0;
        write_data(out, n.cpt_data, shape, 0, pos);
        out += ";\n}\n";
    }
    return out;
}

}  // namespace cptrank
