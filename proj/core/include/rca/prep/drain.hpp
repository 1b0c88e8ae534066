#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace rca::prep {

inline constexpr const char* kWildcard = "<*>";

struct LogTemplate {
    std::size_t id = 0;
    std::vector<std::string> tokens; // differing positions hold kWildcard
    std::size_t count = 0;

    std::string pattern() const;
};

struct LogTemplateTable {
    std::vector<LogTemplate> templates;
    std::vector<std::size_t> assignment; // template id per ingested message
};

// Fixed-depth parse tree: messages are bucketed by token count, then by up to
// (depth - 2) leading tokens; tokens containing digits route through a
// wildcard branch. Within a leaf a message joins the most similar template
// if the share of matching positions reaches `similarity`.
class Drain {
public:
    Drain(double similarity = 0.5, std::size_t depth = 4, std::size_t max_children = 100);
    ~Drain();
    Drain(Drain&&) noexcept;
    Drain& operator=(Drain&&) noexcept;

    std::size_t add(const std::vector<std::string>& tokens);
    const std::vector<LogTemplate>& templates() const noexcept { return templates_; }

private:
    struct Node;

    double similarity_;
    std::size_t depth_;
    std::size_t max_children_;
    std::map<std::size_t, std::unique_ptr<Node>> by_length_;
    std::vector<LogTemplate> templates_;
};

LogTemplateTable mine_log_templates(const std::vector<std::vector<std::string>>& messages, double similarity = 0.5,
                                    std::size_t depth = 4);

} // namespace rca::prep
