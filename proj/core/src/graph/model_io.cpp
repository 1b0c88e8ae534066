#include "rca/graph/model_io.hpp"

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

#include <fmt/format.h>

namespace rca::graph {

namespace {

constexpr int kVersion = 1;

} // namespace

std::string format_gat_model(const GatModel& model) {
    const auto& s = model.shape;
    const auto classes = class_counts();
    std::string out = fmt::format("rca-gat {}\n", kVersion);
    out += fmt::format("input_dim {}\nhidden {}\nheads {}\nlayers {}\ntype_aware {}\n", s.input_dim, s.hidden, s.heads,
                       s.layers, s.type_aware ? 1 : 0);
    out += fmt::format("classes {} {} {}\n", classes[0], classes[1], classes[2]);
    out += "features";
    for (const auto& f : model.feature_names) out += " " + f;
    out += fmt::format("\nparams {}\n", model.params.size());
    for (double p : model.params) {
        out += text::exact(p);
        out += '\n';
    }
    return out;
}

GatModel parse_gat_model(std::string_view content) {
    const auto lines = text::split_lines(content);
    std::size_t pos = 0;
    auto next = [&](std::string_view key) {
        if (pos >= lines.size()) throw InputError(fmt::format("model file truncated before '{}'", key));
        auto parts = text::split_ws(lines[pos]);
        ++pos;
        if (parts.empty() || parts[0] != key) {
            throw InputError(fmt::format("model file line {}: expected '{}'", pos, key));
        }
        parts.erase(parts.begin());
        return parts;
    };
    auto single = [&](std::string_view key) {
        const auto v = next(key);
        if (v.size() != 1) throw InputError(fmt::format("model file line {}: '{}' takes one value", pos, key));
        return static_cast<std::size_t>(text::parse_int(v[0], key));
    };
    const auto version = next("rca-gat");
    if (version.size() != 1 || text::parse_int(version[0], "version") != kVersion) {
        throw InputError("unsupported model file version");
    }
    GatModel m;
    m.shape.input_dim = single("input_dim");
    m.shape.hidden = single("hidden");
    m.shape.heads = single("heads");
    m.shape.layers = single("layers");
    m.shape.type_aware = single("type_aware") != 0;
    const auto classes = next("classes");
    const auto expected = class_counts();
    if (classes.size() != expected.size()) throw InputError("model file: 'classes' needs three counts");
    for (std::size_t k = 0; k < expected.size(); ++k) {
        if (static_cast<std::size_t>(text::parse_int(classes[k], "classes")) != expected[k]) {
            throw InputError("model file: catalog sizes differ from this build's fault catalog");
        }
    }
    m.feature_names = next("features");
    if (m.feature_names.size() != m.shape.input_dim) throw InputError("model file: feature list does not match input_dim");
    const std::size_t count = single("params");
    if (count != gat_parameter_count(m.shape)) throw InputError("model file: parameter count does not match dims");
    m.params.reserve(count);
    for (; pos < lines.size() && m.params.size() < count; ++pos) {
        const auto line = text::trim(lines[pos]);
        if (line.empty()) continue;
        m.params.push_back(text::parse_double(line, "model parameter"));
    }
    if (m.params.size() != count) throw InputError("model file: truncated parameter list");
    return m;
}

void write_gat_model(const std::filesystem::path& file, const GatModel& model) {
    text::write_file(file.string(), format_gat_model(model));
}

GatModel read_gat_model(const std::filesystem::path& file) {
    try {
        return parse_gat_model(text::read_file(file.string()));
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", file.string(), e.what()));
    }
}

} // namespace rca::graph
