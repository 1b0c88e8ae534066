#include "rca/prep/drain.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace rca::prep {

std::string LogTemplate::pattern() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
    }
    return out;
}

struct Drain::Node {
    std::map<std::string, std::unique_ptr<Node>> children;
    std::vector<std::size_t> clusters; // template ids, leaves only
};

namespace {

bool has_digit(const std::string& token) {
    return std::any_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

double match_share(const std::vector<std::string>& tmpl, const std::vector<std::string>& msg) {
    if (tmpl.empty()) return 1.0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == msg[i] || tmpl[i] == kWildcard) ++same;
    }
    return static_cast<double>(same) / static_cast<double>(tmpl.size());
}

} // namespace

Drain::Drain(double similarity, std::size_t depth, std::size_t max_children)
    : similarity_(similarity), depth_(depth), max_children_(max_children) {
    if (!(similarity > 0.0 && similarity <= 1.0)) throw std::invalid_argument("Drain: similarity must be in (0,1]");
    if (depth < 2) throw std::invalid_argument("Drain: depth must be >= 2");
}

Drain::~Drain() = default;
Drain::Drain(Drain&&) noexcept = default;
Drain& Drain::operator=(Drain&&) noexcept = default;

std::size_t Drain::add(const std::vector<std::string>& tokens) {
    auto& root = by_length_[tokens.size()];
    if (!root) root = std::make_unique<Node>();
    Node* node = root.get();
    const std::size_t prefix = std::min(depth_ - 2, tokens.size());
    for (std::size_t i = 0; i < prefix; ++i) {
        std::string key = has_digit(tokens[i]) ? kWildcard : tokens[i];
        if (node->children.count(key) == 0 && node->children.size() >= max_children_) key = kWildcard;
        auto& child = node->children[key];
        if (!child) child = std::make_unique<Node>();
        node = child.get();
    }

    std::size_t best = 0;
    double best_share = -1.0;
    for (std::size_t id : node->clusters) {
        const double share = match_share(templates_[id].tokens, tokens);
        if (share > best_share) {
            best_share = share;
            best = id;
        }
    }
    if (best_share >= similarity_) {
        auto& t = templates_[best];
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (t.tokens[i] != tokens[i]) t.tokens[i] = kWildcard;
        }
        ++t.count;
        return best;
    }
    const std::size_t id = templates_.size();
    templates_.push_back({id, tokens, 1});
    node->clusters.push_back(id);
    return id;
}

LogTemplateTable mine_log_templates(const std::vector<std::vector<std::string>>& messages, double similarity,
                                    std::size_t depth) {
    Drain drain(similarity, depth);
    LogTemplateTable table;
    table.assignment.reserve(messages.size());
    for (const auto& m : messages) table.assignment.push_back(drain.add(m));
    table.templates = drain.templates();
    return table;
}

} // namespace rca::prep
