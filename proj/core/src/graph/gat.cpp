#include "rca/graph/gat.hpp"

#include "rca/common/rng.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rca::graph {

namespace {

using Eigen::Index;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<Mat>;
using CMapMat = Eigen::Map<const Mat>;
using Vec = Eigen::VectorXd;
using CMapVec = Eigen::Map<const Vec>;

constexpr double kSlope = 0.2;

double lrelu(double x) { return x > 0.0 ? x : kSlope * x; }
double dlrelu(double x) { return x > 0.0 ? 1.0 : kSlope; }

std::size_t layer_input(const GatShape& s, std::size_t layer) {
    return layer == 0 ? s.input_dim : s.heads * s.hidden;
}

std::size_t readout_dim(const GatShape& s) { return s.input_dim + s.layers * s.heads * s.hidden; }

struct Layout {
    std::size_t type_emb = 0; // kinds x input_dim
    // Per (layer, head), index layer * heads + head.
    std::vector<std::size_t> w, a_src, a_dst, tau, rho;
    std::size_t fault_w = 0;
    std::size_t fault_b = 0;
    std::array<std::size_t, sim::kEntityKindCount> type_w{};
    std::array<std::size_t, sim::kEntityKindCount> type_b{};
    std::array<std::size_t, sim::kEntityKindCount> classes{};
    std::size_t total = 0;

    explicit Layout(const GatShape& s) {
        if (s.input_dim == 0 || s.hidden == 0 || s.heads == 0 || s.layers == 0) {
            throw std::invalid_argument("GAT dimensions must be positive");
        }
        classes = class_counts();
        std::size_t pos = 0;
        type_emb = pos;
        pos += sim::kEntityKindCount * s.input_dim;
        for (std::size_t l = 0; l < s.layers; ++l) {
            const std::size_t din = layer_input(s, l);
            for (std::size_t h = 0; h < s.heads; ++h) {
                w.push_back(pos);
                pos += s.hidden * din;
                a_src.push_back(pos);
                pos += s.hidden;
                a_dst.push_back(pos);
                pos += s.hidden;
                tau.push_back(pos);
                pos += sim::kEntityKindCount;
                rho.push_back(pos);
                pos += sim::kEdgeKindCount;
            }
        }
        const std::size_t r = readout_dim(s);
        fault_w = pos;
        pos += r;
        fault_b = pos;
        pos += 1;
        for (std::size_t k = 0; k < sim::kEntityKindCount; ++k) {
            type_w[k] = pos;
            pos += classes[k] * r;
            type_b[k] = pos;
            pos += classes[k];
        }
        total = pos;
    }
};

struct Neighbor {
    std::size_t node;
    int relation;
    double weight;
};

std::vector<std::vector<Neighbor>> neighborhoods(const HetGraph& g) {
    std::vector<std::vector<Neighbor>> nb(g.nodes.size());
    for (const auto& e : g.edges) {
        if (!(e.weight > 0.0)) continue;
        const int rel = static_cast<int>(e.kind);
        nb[e.target].push_back({e.source, rel, e.weight});
        if (e.source != e.target) nb[e.source].push_back({e.target, rel, e.weight});
    }
    for (std::size_t v = 0; v < nb.size(); ++v) {
        if (nb[v].empty()) nb[v].push_back({v, -1, 1.0});
    }
    return nb;
}

struct HeadCache {
    Mat z;
    std::vector<std::vector<double>> raw;
    std::vector<std::vector<double>> alpha;
    Mat agg;
};

struct LayerCache {
    Mat in;
    std::vector<HeadCache> heads;
    Mat out;
};

struct Cache {
    Mat x; // features plus type embedding
    std::vector<LayerCache> layers;
    Mat readout;
    std::vector<double> prob;
    std::vector<std::vector<double>> type_prob;
};

void check(const GatModel& m, const HetGraph& g, const Layout& L) {
    if (m.params.size() != L.total) throw std::invalid_argument("GAT parameter vector has the wrong size");
    if (g.feature_dim() != m.shape.input_dim) {
        throw std::invalid_argument(fmt::format("graph has {} features per node, model expects {}", g.feature_dim(),
                                                m.shape.input_dim));
    }
}

Cache forward(const GatModel& m, const HetGraph& g, const Layout& L, const std::vector<std::vector<Neighbor>>& nb) {
    const auto& s = m.shape;
    const double* p = m.params.data();
    const std::size_t n = g.nodes.size();
    Cache c;
    c.x.resize(static_cast<Index>(n), static_cast<Index>(s.input_dim));
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t f = 0; f < s.input_dim; ++f) {
            double x = g.nodes[v].features[f];
            if (s.type_aware) x += p[L.type_emb + static_cast<std::size_t>(g.nodes[v].kind) * s.input_dim + f];
            c.x(static_cast<Index>(v), static_cast<Index>(f)) = x;
        }
    }
    const Mat* in = &c.x;
    for (std::size_t l = 0; l < s.layers; ++l) {
        LayerCache lc;
        lc.in = *in;
        const auto din = static_cast<Index>(layer_input(s, l));
        const auto hid = static_cast<Index>(s.hidden);
        lc.out.resize(static_cast<Index>(n), static_cast<Index>(s.heads) * hid);
        for (std::size_t h = 0; h < s.heads; ++h) {
            const std::size_t k = l * s.heads + h;
            const CMapMat W(p + L.w[k], hid, din);
            const CMapVec a_src(p + L.a_src[k], hid);
            const CMapVec a_dst(p + L.a_dst[k], hid);
            HeadCache hc;
            hc.z = lc.in * W.transpose();
            const Vec s_src = hc.z * a_src;
            const Vec s_dst = hc.z * a_dst;
            hc.raw.resize(n);
            hc.alpha.resize(n);
            hc.agg = Mat::Zero(static_cast<Index>(n), hid);
            for (std::size_t v = 0; v < n; ++v) {
                const auto& nv = nb[v];
                std::vector<double> e(nv.size());
                hc.raw[v].resize(nv.size());
                for (std::size_t q = 0; q < nv.size(); ++q) {
                    const double raw = s_dst(static_cast<Index>(v)) + s_src(static_cast<Index>(nv[q].node));
                    hc.raw[v][q] = raw;
                    e[q] = lrelu(raw);
                    if (s.type_aware) {
                        e[q] += p[L.tau[k] + static_cast<std::size_t>(g.nodes[nv[q].node].kind)];
                        if (nv[q].relation >= 0) e[q] += p[L.rho[k] + static_cast<std::size_t>(nv[q].relation)];
                    }
                }
                const double top = *std::max_element(e.begin(), e.end());
                double sum = 0.0;
                for (std::size_t q = 0; q < nv.size(); ++q) {
                    e[q] = nv[q].weight * std::exp(e[q] - top);
                    sum += e[q];
                }
                for (auto& x : e) x /= sum;
                for (std::size_t q = 0; q < nv.size(); ++q) {
                    hc.agg.row(static_cast<Index>(v)) += e[q] * hc.z.row(static_cast<Index>(nv[q].node));
                }
                hc.alpha[v] = std::move(e);
            }
            lc.out.middleCols(static_cast<Index>(h) * hid, hid) = hc.agg.unaryExpr(&lrelu);
            lc.heads.push_back(std::move(hc));
        }
        c.layers.push_back(std::move(lc));
        in = &c.layers.back().out;
    }

    const auto r = static_cast<Index>(readout_dim(s));
    c.readout.resize(static_cast<Index>(n), r);
    c.readout.leftCols(static_cast<Index>(s.input_dim)) = c.x;
    Index col = static_cast<Index>(s.input_dim);
    for (const auto& lc : c.layers) {
        c.readout.middleCols(col, lc.out.cols()) = lc.out;
        col += lc.out.cols();
    }
    const CMapVec fw(p + L.fault_w, r);
    c.prob.resize(n);
    c.type_prob.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        const auto row = c.readout.row(static_cast<Index>(v));
        const double logit = row.dot(fw) + p[L.fault_b];
        c.prob[v] = 1.0 / (1.0 + std::exp(-logit));
        const auto kind = static_cast<std::size_t>(g.nodes[v].kind);
        const auto classes = static_cast<Index>(L.classes[kind]);
        const CMapMat tw(p + L.type_w[kind], classes, r);
        const CMapVec tb(p + L.type_b[kind], classes);
        Vec z = tw * row.transpose() + tb;
        z.array() -= z.maxCoeff();
        z = z.array().exp();
        z /= z.sum();
        c.type_prob[v].assign(z.data(), z.data() + z.size());
    }
    return c;
}

} // namespace

std::array<std::size_t, sim::kEntityKindCount> class_counts() {
    return {sim::fault_catalog(sim::EntityKind::host).size(), sim::fault_catalog(sim::EntityKind::pod).size(),
            sim::fault_catalog(sim::EntityKind::service).size()};
}

std::size_t gat_parameter_count(const GatShape& shape) { return Layout(shape).total; }

GatModel init_gat(const GatShape& shape, std::uint64_t seed) {
    const Layout L(shape);
    GatModel m;
    m.shape = shape;
    m.params.assign(L.total, 0.0);
    Rng rng(seed);
    auto glorot = [&](std::size_t offset, std::size_t rows, std::size_t cols) {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        for (std::size_t i = 0; i < rows * cols; ++i) m.params[offset + i] = rng.uniform(-limit, limit);
    };
    for (std::size_t l = 0; l < shape.layers; ++l) {
        for (std::size_t h = 0; h < shape.heads; ++h) {
            const std::size_t k = l * shape.heads + h;
            glorot(L.w[k], shape.hidden, layer_input(shape, l));
            glorot(L.a_src[k], shape.hidden, 1);
            glorot(L.a_dst[k], shape.hidden, 1);
        }
    }
    const std::size_t r = readout_dim(shape);
    glorot(L.fault_w, 1, r);
    for (std::size_t k = 0; k < sim::kEntityKindCount; ++k) glorot(L.type_w[k], L.classes[k], r);
    return m;
}

double& type_logit(GatModel& model, std::size_t layer, std::size_t head, sim::EntityKind kind) {
    const Layout L(model.shape);
    if (layer >= model.shape.layers || head >= model.shape.heads) throw std::out_of_range("GAT layer/head");
    return model.params[L.tau[layer * model.shape.heads + head] + static_cast<std::size_t>(kind)];
}

double& relation_logit(GatModel& model, std::size_t layer, std::size_t head, sim::EdgeKind kind) {
    const Layout L(model.shape);
    if (layer >= model.shape.layers || head >= model.shape.heads) throw std::out_of_range("GAT layer/head");
    return model.params[L.rho[layer * model.shape.heads + head] + static_cast<std::size_t>(kind)];
}

GatOutput attention_forward(const GatModel& model, const HetGraph& graph) {
    const Layout L(model.shape);
    check(model, graph, L);
    const auto nb = neighborhoods(graph);
    const auto c = forward(model, graph, L, nb);
    GatOutput out;
    const auto& last = c.layers.back().out;
    out.embeddings.resize(graph.nodes.size());
    for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
        out.embeddings[v].assign(last.row(static_cast<Index>(v)).begin(), last.row(static_cast<Index>(v)).end());
    }
    for (const auto& lc : c.layers) {
        auto& layer = out.attention.emplace_back();
        for (const auto& hc : lc.heads) {
            auto& head = layer.emplace_back(graph.nodes.size());
            for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
                for (std::size_t q = 0; q < nb[v].size(); ++q) {
                    head[v].push_back({nb[v][q].node, nb[v][q].relation, nb[v][q].weight, hc.alpha[v][q]});
                }
            }
        }
    }
    return out;
}

std::vector<std::string> Prediction::flagged_ids() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (flagged(i)) out.push_back(ids[i]);
    }
    return out;
}

std::string Prediction::type_of(std::size_t i) const {
    const auto& d = types[i];
    const auto best = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
    return std::string(sim::fault_catalog(kinds[i])[best].name);
}

Prediction predict(const GatModel& model, const HetGraph& graph) {
    const Layout L(model.shape);
    check(model, graph, L);
    const auto c = forward(model, graph, L, neighborhoods(graph));
    Prediction out;
    for (const auto& node : graph.nodes) {
        out.ids.push_back(node.id);
        out.kinds.push_back(node.kind);
    }
    out.probability = c.prob;
    out.types = c.type_prob;
    return out;
}

NodeLabels labels_from_truth(const HetGraph& graph, const sim::GroundTruth& truth) {
    NodeLabels labels;
    for (const auto& node : graph.nodes) {
        const bool faulty = std::find(truth.faulty.begin(), truth.faulty.end(), node.id) != truth.faulty.end();
        labels.faulty.push_back(faulty ? 1 : 0);
        int type = -1;
        if (faulty) {
            const auto it = truth.fault_types.find(node.id);
            if (it != truth.fault_types.end()) {
                const auto idx = sim::fault_index(node.kind, it->second);
                if (!idx) {
                    throw std::invalid_argument(
                        fmt::format("fault type '{}' is not in the {} catalog", it->second, sim::to_string(node.kind)));
                }
                type = static_cast<int>(*idx);
            }
        }
        labels.fault_type.push_back(type);
    }
    return labels;
}

double gat_loss(const GatModel& model, const HetGraph& graph, const NodeLabels& labels, std::vector<double>* grad) {
    const auto& s = model.shape;
    const Layout L(s);
    check(model, graph, L);
    const std::size_t n = graph.nodes.size();
    if (labels.faulty.size() != n || labels.fault_type.size() != n) {
        throw std::invalid_argument("GAT labels do not match the graph");
    }
    const auto nb = neighborhoods(graph);
    const auto c = forward(model, graph, L, nb);
    const double* p = model.params.data();

    std::size_t n_faulty = 0;
    for (std::size_t v = 0; v < n; ++v) n_faulty += labels.fault_type[v] >= 0 ? 1 : 0;
    double bce = 0.0;
    double ce = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        const double q = std::clamp(c.prob[v], 1e-15, 1.0 - 1e-15);
        bce -= labels.faulty[v] ? std::log(q) : std::log(1.0 - q);
        if (labels.fault_type[v] >= 0) {
            ce -= std::log(std::max(c.type_prob[v][static_cast<std::size_t>(labels.fault_type[v])], 1e-300));
        }
    }
    const double loss = bce / static_cast<double>(n) + (n_faulty ? ce / static_cast<double>(n_faulty) : 0.0);
    if (!grad) return loss;

    grad->resize(L.total, 0.0);
    double* gp = grad->data();
    const auto r = static_cast<Index>(readout_dim(s));
    Mat d_readout = Mat::Zero(static_cast<Index>(n), r);
    const CMapVec fw(p + L.fault_w, r);
    for (std::size_t v = 0; v < n; ++v) {
        const auto row = c.readout.row(static_cast<Index>(v));
        const double dlogit = (c.prob[v] - labels.faulty[v]) / static_cast<double>(n);
        Eigen::Map<Vec>(gp + L.fault_w, r) += dlogit * row.transpose();
        gp[L.fault_b] += dlogit;
        d_readout.row(static_cast<Index>(v)) += dlogit * fw.transpose();
        if (labels.fault_type[v] < 0) continue;
        const auto kind = static_cast<std::size_t>(graph.nodes[v].kind);
        const auto classes = static_cast<Index>(L.classes[kind]);
        Vec dl = Eigen::Map<const Vec>(c.type_prob[v].data(), classes);
        dl(labels.fault_type[v]) -= 1.0;
        dl /= static_cast<double>(n_faulty);
        MapMat(gp + L.type_w[kind], classes, r) += dl * row;
        Eigen::Map<Vec>(gp + L.type_b[kind], classes) += dl;
        d_readout.row(static_cast<Index>(v)) += (CMapMat(p + L.type_w[kind], classes, r).transpose() * dl).transpose();
    }

    Mat dx = d_readout.leftCols(static_cast<Index>(s.input_dim));
    std::vector<Mat> d_out(s.layers);
    Index col = static_cast<Index>(s.input_dim);
    for (std::size_t l = 0; l < s.layers; ++l) {
        const Index width = c.layers[l].out.cols();
        d_out[l] = d_readout.middleCols(col, width);
        col += width;
    }

    const auto hid = static_cast<Index>(s.hidden);
    for (std::size_t l = s.layers; l-- > 0;) {
        const auto& lc = c.layers[l];
        const auto din = static_cast<Index>(layer_input(s, l));
        Mat d_in = Mat::Zero(static_cast<Index>(n), din);
        for (std::size_t h = 0; h < s.heads; ++h) {
            const std::size_t k = l * s.heads + h;
            const auto& hc = lc.heads[h];
            const CMapMat W(p + L.w[k], hid, din);
            const CMapVec a_src(p + L.a_src[k], hid);
            const CMapVec a_dst(p + L.a_dst[k], hid);
            Mat d_agg = d_out[l].middleCols(static_cast<Index>(h) * hid, hid);
            d_agg.array() *= hc.agg.unaryExpr(&dlrelu).array();
            Mat dz = Mat::Zero(static_cast<Index>(n), hid);
            Vec ds_src = Vec::Zero(static_cast<Index>(n));
            Vec ds_dst = Vec::Zero(static_cast<Index>(n));
            for (std::size_t v = 0; v < n; ++v) {
                const auto& nv = nb[v];
                const auto gv = d_agg.row(static_cast<Index>(v));
                std::vector<double> d_alpha(nv.size());
                double dot = 0.0;
                for (std::size_t q = 0; q < nv.size(); ++q) {
                    const auto u = static_cast<Index>(nv[q].node);
                    dz.row(u) += hc.alpha[v][q] * gv;
                    d_alpha[q] = gv.dot(hc.z.row(u));
                    dot += hc.alpha[v][q] * d_alpha[q];
                }
                for (std::size_t q = 0; q < nv.size(); ++q) {
                    const double de = hc.alpha[v][q] * (d_alpha[q] - dot);
                    if (s.type_aware) {
                        gp[L.tau[k] + static_cast<std::size_t>(graph.nodes[nv[q].node].kind)] += de;
                        if (nv[q].relation >= 0) gp[L.rho[k] + static_cast<std::size_t>(nv[q].relation)] += de;
                    }
                    const double draw = de * dlrelu(hc.raw[v][q]);
                    ds_dst(static_cast<Index>(v)) += draw;
                    ds_src(static_cast<Index>(nv[q].node)) += draw;
                }
            }
            Eigen::Map<Vec>(gp + L.a_src[k], hid) += hc.z.transpose() * ds_src;
            Eigen::Map<Vec>(gp + L.a_dst[k], hid) += hc.z.transpose() * ds_dst;
            dz += ds_src * a_src.transpose() + ds_dst * a_dst.transpose();
            MapMat(gp + L.w[k], hid, din) += dz.transpose() * lc.in;
            d_in += dz * W;
        }
        if (l > 0) {
            d_out[l - 1] += d_in;
        } else {
            dx += d_in;
        }
    }
    if (s.type_aware) {
        for (std::size_t v = 0; v < n; ++v) {
            const auto kind = static_cast<std::size_t>(graph.nodes[v].kind);
            Eigen::Map<Vec>(gp + L.type_emb + kind * s.input_dim, static_cast<Index>(s.input_dim)) +=
                dx.row(static_cast<Index>(v)).transpose();
        }
    }
    return loss;
}

} // namespace rca::graph
