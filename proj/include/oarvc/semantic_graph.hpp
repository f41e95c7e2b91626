#ifndef OARVC_SEMANTIC_GRAPH_HPP
#define OARVC_SEMANTIC_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "oarvc/oar.hpp"
#include "oarvc/rng.hpp"
#include "oarvc/source_codec.hpp"
#include "oarvc/tensor.hpp"

namespace oarvc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Embedding and propagation dimensions. The angle vocabulary has 2^q rows.
struct GraphDims {
    int d_category = 32;
    int d_angle = 16;
    int d_relation = 16;
    int d_out = 64;
    int q_angle = 8;

    int node_dim() const { return d_category + d_angle; }

    friend bool operator==(const GraphDims&, const GraphDims&) = default;
};

struct MatrixF {
    int rows = 0;
    int cols = 0;
    std::vector<float> data;  // row-major

    MatrixF() = default;
    MatrixF(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0f) {}

    float* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const float* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    friend bool operator==(const MatrixF&, const MatrixF&) = default;
};

struct Affine {
    MatrixF weight;  // out x in
    std::vector<float> bias;

    std::vector<float> apply(std::span<const float> x) const {
        std::vector<float> y(bias.begin(), bias.end());
        for (int r = 0; r < weight.rows; ++r) {
            const float* w = weight.row(r);
            float acc = 0.0f;
            for (int c = 0; c < weight.cols; ++c) acc += w[c] * x[c];
            y[r] += acc;
        }
        return y;
    }

    friend bool operator==(const Affine&, const Affine&) = default;
};

// One propagation round: candidate updates from each (subject, relation,
// object) triple, then per-node mean with the previous state, then an affine
// projection onto the round's output width.
struct GcnLayer {
    Affine subject_update;  // (2*node_in + d_relation) -> node_in
    Affine object_update;   // same shape
    Affine projection;      // node_in -> node_out

    friend bool operator==(const GcnLayer&, const GcnLayer&) = default;
};

struct GraphWeights {
    GraphDims dims;
    MatrixF category_table;  // kCategoryCount x d_category
    MatrixF angle_table;     // 2^q x d_angle
    MatrixF relation_table;  // kRelationLabelCount x d_relation
    GcnLayer layer1;         // node 48 -> 64 at the defaults
    GcnLayer layer2;         // node 64 -> 64

    friend bool operator==(const GraphWeights&, const GraphWeights&) = default;
};

namespace detail {

inline MatrixF seeded_matrix(Rng& rng, int rows, int cols) {
    MatrixF m(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (auto& v : m.data) v = static_cast<float>(rng.next_uniform(-scale, scale));
    return m;
}

inline Affine seeded_affine(Rng& rng, int out, int in) {
    Affine a;
    a.weight = seeded_matrix(rng, out, in);
    a.bias.resize(out);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : a.bias) v = static_cast<float>(rng.next_uniform(-scale, scale));
    return a;
}

inline GcnLayer seeded_layer(Rng& rng, int node_in, int node_out, int d_relation) {
    GcnLayer layer;
    const int z = 2 * node_in + d_relation;
    layer.subject_update = seeded_affine(rng, node_in, z);
    layer.object_update = seeded_affine(rng, node_in, z);
    layer.projection = seeded_affine(rng, node_out, node_in);
    return layer;
}

}  // namespace detail

inline constexpr std::uint64_t kDefaultWeightsSeed = 0x9a2f11c3u;

inline GraphWeights seeded_weights(std::uint64_t seed, const GraphDims& dims = {}) {
    Rng rng(seed);
    GraphWeights w;
    w.dims = dims;
    w.category_table = detail::seeded_matrix(rng, kCategoryCount, dims.d_category);
    w.angle_table = detail::seeded_matrix(rng, 1 << dims.q_angle, dims.d_angle);
    w.relation_table = detail::seeded_matrix(rng, kRelationLabelCount, dims.d_relation);
    w.layer1 = detail::seeded_layer(rng, dims.node_dim(), dims.d_out, dims.d_relation);
    w.layer2 = detail::seeded_layer(rng, dims.d_out, dims.d_out, dims.d_relation);
    return w;
}

// ---------------------------------------------------------------------------
// Embedding (one-hot selection is a table row lookup)
// ---------------------------------------------------------------------------

struct EmbeddedGraph {
    std::vector<ObjectId> node_ids;  // frame object order, background sentinel last
    std::vector<std::vector<float>> nodes;
    struct Triple {
        int subject;  // node indices
        int object;
        int label;
    };
    std::vector<Triple> triples;  // sorted by subject id, object id, label; unique
    std::vector<std::vector<float>> edge_vectors;  // one per triple
};

// Node vector = concat(category row, angle-bin row); the background node's
// angle part is the constant zero vector.
inline EmbeddedGraph embed(const OarFrame& frame, const GraphWeights& weights) {
    const GraphDims& dims = weights.dims;
    if (weights.category_table.rows != kCategoryCount ||
        weights.angle_table.rows != (1 << dims.q_angle) ||
        weights.relation_table.rows != kRelationLabelCount)
        throw ConfigError("embedding tables do not match vocabulary sizes");

    EmbeddedGraph g;
    g.node_ids = frame.objects;
    g.node_ids.push_back(kBackgroundId);
    g.nodes.reserve(g.node_ids.size());
    for (const ObjectId id : g.node_ids) {
        std::vector<float> node(dims.node_dim(), 0.0f);
        if (id == kBackgroundId) {
            const float* cat = weights.category_table.row(
                static_cast<int>(Category::kBackground));
            std::copy(cat, cat + dims.d_category, node.begin());
            // angle part stays zero
        } else {
            const Attributes& a = frame.attributes.at(id);
            const float* cat = weights.category_table.row(static_cast<int>(a.category));
            std::copy(cat, cat + dims.d_category, node.begin());
            const int bin = detail::angle_bin(a.angle, dims.q_angle);
            const float* ang = weights.angle_table.row(bin);
            std::copy(ang, ang + dims.d_angle, node.begin() + dims.d_category);
        }
        g.nodes.push_back(std::move(node));
    }

    auto node_index = [&](ObjectId id) {
        if (id == kBackgroundId) return static_cast<int>(g.node_ids.size()) - 1;
        const auto it = std::find(frame.objects.begin(), frame.objects.end(), id);
        if (it == frame.objects.end()) throw ConfigError("relation endpoint not in frame");
        return static_cast<int>(it - frame.objects.begin());
    };

    std::vector<Relation> relations = frame.relations;
    canonicalize_relations(relations);
    for (const Relation& r : relations) {
        g.triples.push_back({node_index(r.subject), node_index(r.object),
                             static_cast<int>(r.label)});
        const float* edge = weights.relation_table.row(static_cast<int>(r.label));
        g.edge_vectors.emplace_back(edge, edge + dims.d_relation);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Graph propagation
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::vector<float>> run_layer(const std::vector<std::vector<float>>& nodes,
                                                 const EmbeddedGraph& g, const GcnLayer& layer,
                                                 int d_relation) {
    const int node_dim = static_cast<int>(nodes.empty() ? 0 : nodes.front().size());
    if (layer.subject_update.weight.cols != 2 * node_dim + d_relation ||
        layer.projection.weight.cols != node_dim)
        throw ConfigError("layer weight shapes do not match node dimensionality");

    // per-node running sum of candidate updates, seeded with the node state
    std::vector<std::vector<float>> sums = nodes;
    std::vector<int> counts(nodes.size(), 1);

    std::vector<float> z(2 * static_cast<std::size_t>(node_dim) + d_relation);
    for (std::size_t t = 0; t < g.triples.size(); ++t) {
        const auto& triple = g.triples[t];
        const auto& fs = nodes[triple.subject];
        const auto& fo = nodes[triple.object];
        const auto& er = g.edge_vectors[t];
        std::copy(fs.begin(), fs.end(), z.begin());
        std::copy(er.begin(), er.end(), z.begin() + node_dim);
        std::copy(fo.begin(), fo.end(), z.begin() + node_dim + d_relation);

        auto relu = [](std::vector<float> v) {
            for (auto& x : v) x = x > 0.0f ? x : 0.0f;
            return v;
        };
        const auto us = relu(layer.subject_update.apply(z));
        const auto uo = relu(layer.object_update.apply(z));
        for (int d = 0; d < node_dim; ++d) sums[triple.subject][d] += us[d];
        for (int d = 0; d < node_dim; ++d) sums[triple.object][d] += uo[d];
        ++counts[triple.subject];
        ++counts[triple.object];
    }

    std::vector<std::vector<float>> out;
    out.reserve(nodes.size());
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        std::vector<float>& mean = sums[n];
        const float inv = 1.0f / static_cast<float>(counts[n]);
        for (auto& v : mean) v *= inv;
        out.push_back(layer.projection.apply(mean));
    }
    return out;
}

}  // namespace detail

// Two propagation rounds; isolated nodes see only the projections. Output is
// one feature vector per node (foreground objects first, background last).
inline std::vector<std::vector<float>> graph_compute(const EmbeddedGraph& graph,
                                                     const GraphWeights& weights) {
    const auto mid = detail::run_layer(graph.nodes, graph, weights.layer1,
                                       weights.dims.d_relation);
    return detail::run_layer(mid, graph, weights.layer2, weights.dims.d_relation);
}

inline std::vector<std::vector<float>> object_features(const OarFrame& frame,
                                                       const GraphWeights& weights) {
    auto features = graph_compute(embed(frame, weights), weights);
    features.pop_back();  // drop the background node
    return features;
}

// ---------------------------------------------------------------------------
// Layout assembly: every object feature is expanded over its (inclusive)
// bounding-box region and overlapping regions sum.
// ---------------------------------------------------------------------------

inline Tensor3 build_layout(std::span<const std::vector<float>> features, const OarFrame& frame,
                            int height, int width, int downscale = 1) {
    if (features.size() != frame.objects.size())
        throw ConfigError("build_layout expects one feature per foreground object");
    if (downscale < 1) throw ConfigError("downscale must be >= 1");
    const int lh = height / downscale;
    const int lw = width / downscale;
    const int depth = features.empty() ? 0 : static_cast<int>(features.front().size());
    Tensor3 layout(lh, lw, depth);
    for (std::size_t n = 0; n < features.size(); ++n) {
        const Attributes& a = frame.attributes.at(frame.objects[n]);
        const int i0 = std::clamp(a.y / downscale, 0, lh - 1);
        const int i1 = std::clamp((a.y + a.h) / downscale, 0, lh - 1);
        const int j0 = std::clamp(a.x / downscale, 0, lw - 1);
        const int j1 = std::clamp((a.x + a.w) / downscale, 0, lw - 1);
        const std::vector<float>& f = features[n];
        for (int i = i0; i <= i1; ++i) {
            for (int j = j0; j <= j1; ++j) {
                float* cell = layout.at(i, j);
                for (int d = 0; d < depth; ++d) cell[d] += f[d];
            }
        }
    }
    return layout;
}

// ---------------------------------------------------------------------------
// Weights file: "OARW" magic, version byte, JSON manifest with the
// dimensions, then shape-tagged little-endian float32 tensors.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_u32le(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t read_u32le(std::istream& in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        const int c = in.get();
        if (c == EOF) throw ConfigError("truncated weights file");
        v |= static_cast<std::uint32_t>(c) << (8 * i);
    }
    return v;
}

inline void write_tensor(std::ostream& out, const std::string& name,
                         std::span<const std::uint32_t> shape, std::span<const float> data) {
    const std::uint16_t name_len = static_cast<std::uint16_t>(name.size());
    out.put(static_cast<char>(name_len & 0xFF));
    out.put(static_cast<char>(name_len >> 8));
    out.write(name.data(), name_len);
    out.put(static_cast<char>(shape.size()));
    for (const auto d : shape) write_u32le(out, d);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
}

struct RawTensor {
    std::vector<std::uint32_t> shape;
    std::vector<float> data;
};

inline std::map<std::string, RawTensor> read_tensors(std::istream& in) {
    std::map<std::string, RawTensor> tensors;
    while (true) {
        const int lo = in.get();
        if (lo == EOF) break;
        const int hi = in.get();
        if (hi == EOF) throw ConfigError("truncated weights file");
        std::string name(static_cast<std::size_t>(lo | (hi << 8)), '\0');
        in.read(name.data(), static_cast<std::streamsize>(name.size()));
        const int ndim = in.get();
        if (ndim == EOF) throw ConfigError("truncated weights file");
        RawTensor t;
        std::size_t count = 1;
        for (int d = 0; d < ndim; ++d) {
            t.shape.push_back(read_u32le(in));
            count *= t.shape.back();
        }
        t.data.resize(count);
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
        if (!in) throw ConfigError("truncated weights file");
        tensors[name] = std::move(t);
    }
    return tensors;
}

}  // namespace detail

inline void save_weights(const std::filesystem::path& path, const GraphWeights& w) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out.write("OARW", 4);
    out.put(1);
    nlohmann::json manifest;
    manifest["d_category"] = w.dims.d_category;
    manifest["d_angle"] = w.dims.d_angle;
    manifest["d_relation"] = w.dims.d_relation;
    manifest["d_out"] = w.dims.d_out;
    manifest["q_angle"] = w.dims.q_angle;
    manifest["layers"] = {
        {{"node_in", w.dims.node_dim()}, {"node_out", w.dims.d_out}},
        {{"node_in", w.dims.d_out}, {"node_out", w.dims.d_out}},
    };
    const std::string text = manifest.dump();
    detail::write_u32le(out, static_cast<std::uint32_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));

    auto put_matrix = [&](const std::string& name, const MatrixF& m) {
        const std::uint32_t shape[2] = {static_cast<std::uint32_t>(m.rows),
                                        static_cast<std::uint32_t>(m.cols)};
        detail::write_tensor(out, name, shape, m.data);
    };
    auto put_affine = [&](const std::string& name, const Affine& a) {
        put_matrix(name + ".weight", a.weight);
        const std::uint32_t shape[1] = {static_cast<std::uint32_t>(a.bias.size())};
        detail::write_tensor(out, name + ".bias", shape, a.bias);
    };
    put_matrix("category_table", w.category_table);
    put_matrix("angle_table", w.angle_table);
    put_matrix("relation_table", w.relation_table);
    for (int l = 1; l <= 2; ++l) {
        const GcnLayer& layer = l == 1 ? w.layer1 : w.layer2;
        const std::string prefix = "layer" + std::to_string(l);
        put_affine(prefix + ".subject_update", layer.subject_update);
        put_affine(prefix + ".object_update", layer.object_update);
        put_affine(prefix + ".projection", layer.projection);
    }
    if (!out) throw ConfigError("short write: " + path.string());
}

inline GraphWeights load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open weights file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "OARW", 4) != 0)
        throw ConfigError("not a weights file: " + path.string());
    if (in.get() != 1) throw ConfigError("unsupported weights version");
    const std::uint32_t manifest_len = detail::read_u32le(in);
    std::string text(manifest_len, '\0');
    in.read(text.data(), manifest_len);
    if (!in) throw ConfigError("truncated weights file");
    const auto manifest = nlohmann::json::parse(text);

    GraphWeights w;
    w.dims.d_category = manifest.at("d_category").get<int>();
    w.dims.d_angle = manifest.at("d_angle").get<int>();
    w.dims.d_relation = manifest.at("d_relation").get<int>();
    w.dims.d_out = manifest.at("d_out").get<int>();
    w.dims.q_angle = manifest.at("q_angle").get<int>();

    auto tensors = detail::read_tensors(in);
    auto get_matrix = [&](const std::string& name, int rows, int cols) {
        const auto it = tensors.find(name);
        if (it == tensors.end()) throw ConfigError("missing tensor: " + name);
        const auto& t = it->second;
        if (t.shape.size() != 2 || static_cast<int>(t.shape[0]) != rows ||
            static_cast<int>(t.shape[1]) != cols)
            throw ConfigError("tensor " + name + " has unexpected shape");
        MatrixF m(rows, cols);
        m.data = t.data;
        return m;
    };
    auto get_affine = [&](const std::string& name, int out_dim, int in_dim) {
        Affine a;
        a.weight = get_matrix(name + ".weight", out_dim, in_dim);
        const auto it = tensors.find(name + ".bias");
        if (it == tensors.end()) throw ConfigError("missing tensor: " + name + ".bias");
        if (it->second.data.size() != static_cast<std::size_t>(out_dim))
            throw ConfigError("tensor " + name + ".bias has unexpected shape");
        a.bias = it->second.data;
        return a;
    };

    w.category_table = get_matrix("category_table", kCategoryCount, w.dims.d_category);
    w.angle_table = get_matrix("angle_table", 1 << w.dims.q_angle, w.dims.d_angle);
    w.relation_table = get_matrix("relation_table", kRelationLabelCount, w.dims.d_relation);
    const int node1 = w.dims.node_dim();
    w.layer1.subject_update =
        get_affine("layer1.subject_update", node1, 2 * node1 + w.dims.d_relation);
    w.layer1.object_update =
        get_affine("layer1.object_update", node1, 2 * node1 + w.dims.d_relation);
    w.layer1.projection = get_affine("layer1.projection", w.dims.d_out, node1);
    const int node2 = w.dims.d_out;
    w.layer2.subject_update =
        get_affine("layer2.subject_update", node2, 2 * node2 + w.dims.d_relation);
    w.layer2.object_update =
        get_affine("layer2.object_update", node2, 2 * node2 + w.dims.d_relation);
    w.layer2.projection = get_affine("layer2.projection", w.dims.d_out, node2);
    return w;
}

}  // namespace oarvc

#endif  // OARVC_SEMANTIC_GRAPH_HPP
