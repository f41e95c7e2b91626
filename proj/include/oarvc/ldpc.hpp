#ifndef OARVC_LDPC_HPP
#define OARVC_LDPC_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oarvc/rng.hpp"

namespace oarvc {

struct LdpcError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LdpcConfig {
    std::string name = "1/3(1536,4608)";
    int k = 1536;
    int n = 4608;
    std::uint64_t seed = 0x0a51ce5ull;  // PEG tie-break seed, fixed for reproducibility
    int max_iterations = 50;
    enum class Decoder { kSumProduct, kMinSum } decoder = Decoder::kSumProduct;

    double rate() const { return static_cast<double>(k) / n; }

    static LdpcConfig rate_1_3() { return {"1/3(1536,4608)", 1536, 4608}; }
    static LdpcConfig rate_1_2() { return {"1/2(3072,6144)", 3072, 6144}; }
    static LdpcConfig rate_2_3() { return {"2/3(3072,4608)", 3072, 4608}; }

    static LdpcConfig from_rate(std::string_view rate) {
        if (rate == "1/3") return rate_1_3();
        if (rate == "1/2") return rate_1_2();
        if (rate == "2/3") return rate_2_3();
        throw LdpcError("unknown LDPC rate: " + std::string(rate));
    }
};

// A (k, n) binary LDPC code: sparse parity-check matrix H with (n-k) rows,
// a systematic-by-column-selection encoder derived from the reduced row
// echelon form of H, and a belief-propagation decoder.
class LdpcCode {
  public:
    // Progressive edge-growth construction with uniform column degree 3.
    // Girth-greedy: each new edge attaches to the most distant (or unreached)
    // check of minimum degree; ties broken by a seeded key per attempt.
    // Rebuilds with a perturbed seed in the rare case H is rank deficient.
    static LdpcCode build(const LdpcConfig& cfg) {
        constexpr int kColumnDegree = 3;
        for (int attempt = 0; attempt < 16; ++attempt) {
            LdpcCode code = peg_construct(cfg, kColumnDegree, cfg.seed + attempt);
            if (code.setup_encoder()) return code;
        }
        throw LdpcError("PEG construction failed to produce a full-rank H");
    }

    static LdpcCode from_alist(const std::filesystem::path& path, int k) {
        std::ifstream in(path);
        if (!in) throw LdpcError("cannot open alist: " + path.string());
        int n = 0, m = 0;
        in >> n >> m;
        int max_col = 0, max_row = 0;
        in >> max_col >> max_row;
        if (!in || n <= 0 || m <= 0) throw LdpcError("malformed alist header");
        if (m != n - k) throw LdpcError("alist dimensions disagree with (k, n)");
        std::vector<int> col_deg(n), row_deg(m);
        for (auto& d : col_deg) in >> d;
        for (auto& d : row_deg) in >> d;
        LdpcCode code;
        code.k_ = k;
        code.n_ = n;
        code.check_vars_.assign(m, {});
        // column lists (entries 1-based, zero padded)
        for (int j = 0; j < n; ++j) {
            for (int e = 0; e < max_col; ++e) {
                int c = 0;
                in >> c;
                if (c > 0) code.check_vars_[c - 1].push_back(j);
            }
        }
        if (!in) throw LdpcError("truncated alist: " + path.string());
        for (int i = 0; i < m; ++i) {
            std::sort(code.check_vars_[i].begin(), code.check_vars_[i].end());
            if (static_cast<int>(code.check_vars_[i].size()) != row_deg[i])
                throw LdpcError("alist row degree mismatch at check " + std::to_string(i));
        }
        for (int j = 0; j < n; ++j) {
            int deg = 0;
            for (int i = 0; i < m; ++i)
                deg += std::binary_search(code.check_vars_[i].begin(),
                                          code.check_vars_[i].end(), j)
                           ? 1
                           : 0;
            if (deg < 2) throw LdpcError("alist column " + std::to_string(j) + " has degree < 2");
        }
        code.finalize_edges();
        if (!code.setup_encoder()) throw LdpcError("alist H is rank deficient");
        return code;
    }

    void write_alist(const std::filesystem::path& path) const {
        const int m = n_ - k_;
        std::vector<std::vector<int>> var_checks(n_);
        for (int i = 0; i < m; ++i)
            for (const int v : check_vars_[i]) var_checks[v].push_back(i);
        std::size_t max_col = 0, max_row = 0;
        for (const auto& c : var_checks) max_col = std::max(max_col, c.size());
        for (const auto& r : check_vars_) max_row = std::max(max_row, r.size());
        std::ofstream out(path);
        if (!out) throw LdpcError("cannot open for writing: " + path.string());
        out << n_ << " " << m << "\n" << max_col << " " << max_row << "\n";
        for (const auto& c : var_checks) out << c.size() << " ";
        out << "\n";
        for (const auto& r : check_vars_) out << r.size() << " ";
        out << "\n";
        for (const auto& c : var_checks) {
            for (std::size_t e = 0; e < max_col; ++e)
                out << (e < c.size() ? c[e] + 1 : 0) << " ";
            out << "\n";
        }
        for (const auto& r : check_vars_) {
            for (std::size_t e = 0; e < max_row; ++e)
                out << (e < r.size() ? r[e] + 1 : 0) << " ";
            out << "\n";
        }
    }

    int k() const { return k_; }
    int n() const { return n_; }

    // Encodes k info bits into a valid codeword of n bits (H c = 0).
    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const {
        if (static_cast<int>(info.size()) != k_) throw LdpcError("encode expects k info bits");
        std::vector<std::uint8_t> c(n_, 0);
        for (int j = 0; j < k_; ++j) c[info_cols_[j]] = info[j] & 1;
        const int words = (k_ + 63) / 64;
        std::vector<std::uint64_t> s(words, 0);
        for (int j = 0; j < k_; ++j)
            if (info[j] & 1) s[j >> 6] |= 1ull << (j & 63);
        const int m = n_ - k_;
        for (int i = 0; i < m; ++i) {
            const std::uint64_t* row = &parity_masks_[static_cast<std::size_t>(i) * words];
            std::uint64_t acc = 0;
            for (int w = 0; w < words; ++w) acc ^= row[w] & s[w];
            c[pivot_cols_[i]] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
        }
        return c;
    }

    bool is_codeword(std::span<const std::uint8_t> c) const {
        if (static_cast<int>(c.size()) != n_) return false;
        for (const auto& row : check_vars_) {
            int parity = 0;
            for (const int v : row) parity ^= c[v] & 1;
            if (parity) return false;
        }
        return true;
    }

    std::vector<std::uint8_t> extract_info(std::span<const std::uint8_t> c) const {
        std::vector<std::uint8_t> info(k_);
        for (int j = 0; j < k_; ++j) info[j] = c[info_cols_[j]] & 1;
        return info;
    }

    struct DecodeOutcome {
        std::vector<std::uint8_t> info;
        bool converged = false;
        int iterations = 0;
    };

    // Belief propagation on one block of n channel LLRs (positive = bit 0).
    // Sum-product uses the tanh rule with prefix/suffix products; min-sum is
    // normalized with alpha = 0.75. Early exit on a zero syndrome.
    DecodeOutcome decode(std::span<const float> llr, int max_iterations,
                         LdpcConfig::Decoder kind = LdpcConfig::Decoder::kSumProduct) const {
        if (static_cast<int>(llr.size()) != n_) throw LdpcError("decode expects n LLRs");
        const int edges = static_cast<int>(edge_var_.size());
        std::vector<float> c2v(edges, 0.0f);
        std::vector<float> v2c(edges);
        std::vector<float> total(n_);
        std::vector<std::uint8_t> hard(n_);

        auto take_hard_decision = [&] {
            for (int v = 0; v < n_; ++v) hard[v] = total[v] < 0.0f ? 1 : 0;
        };
        auto syndrome_ok = [&] {
            for (std::size_t i = 0; i < check_vars_.size(); ++i) {
                int parity = 0;
                for (int e = check_offset_[i]; e < check_offset_[i + 1]; ++e)
                    parity ^= hard[edge_var_[e]];
                if (parity) return false;
            }
            return true;
        };

        for (int v = 0; v < n_; ++v) total[v] = llr[v];
        take_hard_decision();
        DecodeOutcome out;
        if (syndrome_ok()) {
            out.converged = true;
            out.info = extract_info(hard);
            return out;
        }

        constexpr float kMsgClamp = 28.0f;
        float pre[64], t[64];
        for (int iter = 1; iter <= max_iterations; ++iter) {
            // variable-to-check
            for (int v = 0; v < n_; ++v) total[v] = llr[v];
            for (int e = 0; e < edges; ++e) total[edge_var_[e]] += c2v[e];
            for (int e = 0; e < edges; ++e) v2c[e] = total[edge_var_[e]] - c2v[e];

            // check-to-variable
            for (std::size_t i = 0; i < check_vars_.size(); ++i) {
                const int begin = check_offset_[i];
                const int end = check_offset_[i + 1];
                const int deg = end - begin;
                if (kind == LdpcConfig::Decoder::kSumProduct) {
                    pre[0] = 1.0f;
                    for (int e = 0; e < deg; ++e) {
                        float x = v2c[begin + e] * 0.5f;
                        x = std::clamp(x, -kMsgClamp, kMsgClamp);
                        t[e] = std::tanh(x);
                        pre[e + 1] = pre[e] * t[e];
                    }
                    float suf = 1.0f;
                    for (int e = deg - 1; e >= 0; --e) {
                        float prod = pre[e] * suf;
                        prod = std::clamp(prod, -0.999999940f, 0.999999940f);
                        c2v[begin + e] = 2.0f * std::atanh(prod);
                        suf *= t[e];
                    }
                } else {
                    constexpr float kAlpha = 0.75f;
                    float min1 = 1e30f, min2 = 1e30f;
                    int arg_min = -1;
                    int sign_prod = 0;
                    for (int e = 0; e < deg; ++e) {
                        const float m = v2c[begin + e];
                        const float mag = std::fabs(m);
                        if (m < 0.0f) sign_prod ^= 1;
                        if (mag < min1) {
                            min2 = min1;
                            min1 = mag;
                            arg_min = e;
                        } else if (mag < min2) {
                            min2 = mag;
                        }
                    }
                    for (int e = 0; e < deg; ++e) {
                        const float m = v2c[begin + e];
                        const int sign = sign_prod ^ (m < 0.0f ? 1 : 0);
                        const float mag = kAlpha * (e == arg_min ? min2 : min1);
                        c2v[begin + e] = sign ? -mag : mag;
                    }
                }
            }

            for (int v = 0; v < n_; ++v) total[v] = llr[v];
            for (int e = 0; e < edges; ++e) total[edge_var_[e]] += c2v[e];
            take_hard_decision();
            if (syndrome_ok()) {
                out.converged = true;
                out.iterations = iter;
                out.info = extract_info(hard);
                return out;
            }
        }
        out.converged = false;
        out.iterations = max_iterations;
        out.info = extract_info(hard);
        return out;
    }

    const std::vector<std::vector<int>>& check_rows() const { return check_vars_; }

  private:
    static LdpcCode peg_construct(const LdpcConfig& cfg, int column_degree, std::uint64_t seed) {
        if (cfg.k <= 0 || cfg.n <= cfg.k) throw LdpcError("invalid (k, n)");
        const int n = cfg.n;
        const int m = cfg.n - cfg.k;
        LdpcCode code;
        code.k_ = cfg.k;
        code.n_ = n;
        code.check_vars_.assign(m, {});

        Rng rng(seed);
        std::vector<std::uint32_t> tie_key(m);
        for (auto& key : tie_key) key = static_cast<std::uint32_t>(rng.next_u64());

        std::vector<std::vector<int>> var_checks(n);
        std::vector<int> check_deg(m, 0);
        std::vector<int> reach_epoch(m, -1), var_epoch(n, -1);
        std::vector<int> frontier, next_frontier, last_new;
        int epoch = 0;

        auto pick_min_degree = [&](const std::vector<int>& candidates) {
            int best = -1;
            for (const int c : candidates) {
                if (best < 0 || check_deg[c] < check_deg[best] ||
                    (check_deg[c] == check_deg[best] && tie_key[c] < tie_key[best]))
                    best = c;
            }
            return best;
        };

        std::vector<int> all_checks(m);
        std::iota(all_checks.begin(), all_checks.end(), 0);

        for (int j = 0; j < n; ++j) {
            for (int e = 0; e < column_degree; ++e) {
                int chosen;
                if (var_checks[j].empty()) {
                    chosen = pick_min_degree(all_checks);
                } else {
                    // BFS from variable j through the partially built graph
                    ++epoch;
                    frontier.clear();
                    last_new.clear();
                    int reached = 0;
                    var_epoch[j] = epoch;
                    for (const int c : var_checks[j]) {
                        if (reach_epoch[c] != epoch) {
                            reach_epoch[c] = epoch;
                            frontier.push_back(c);
                            ++reached;
                        }
                    }
                    last_new = frontier;
                    while (reached < m && !frontier.empty()) {
                        next_frontier.clear();
                        for (const int c : frontier) {
                            for (const int v : code.check_vars_[c]) {
                                if (var_epoch[v] == epoch) continue;
                                var_epoch[v] = epoch;
                                for (const int c2 : var_checks[v]) {
                                    if (reach_epoch[c2] != epoch) {
                                        reach_epoch[c2] = epoch;
                                        next_frontier.push_back(c2);
                                        ++reached;
                                    }
                                }
                            }
                        }
                        if (next_frontier.empty()) break;
                        last_new = next_frontier;
                        std::swap(frontier, next_frontier);
                    }
                    if (reached < m) {
                        // connect to an unreached check: keeps the graph expanding
                        int best = -1;
                        for (int c = 0; c < m; ++c) {
                            if (reach_epoch[c] == epoch) continue;
                            if (best < 0 || check_deg[c] < check_deg[best] ||
                                (check_deg[c] == check_deg[best] && tie_key[c] < tie_key[best]))
                                best = c;
                        }
                        chosen = best;
                    } else {
                        // all reachable: deepest level maximizes local girth
                        chosen = pick_min_degree(last_new);
                    }
                }
                code.check_vars_[chosen].push_back(j);
                var_checks[j].push_back(chosen);
                ++check_deg[chosen];
            }
        }
        for (auto& row : code.check_vars_) std::sort(row.begin(), row.end());
        code.finalize_edges();
        return code;
    }

    void finalize_edges() {
        check_offset_.clear();
        edge_var_.clear();
        check_offset_.push_back(0);
        for (const auto& row : check_vars_) {
            for (const int v : row) edge_var_.push_back(v);
            check_offset_.push_back(static_cast<int>(edge_var_.size()));
        }
        std::size_t max_deg = 0;
        for (const auto& row : check_vars_) max_deg = std::max(max_deg, row.size());
        if (max_deg > 63) throw LdpcError("check degree exceeds decoder limit");
    }

    // Reduced row echelon form over GF(2); pivot columns become parity
    // positions, the remaining k columns carry info bits. Returns false if H
    // is rank deficient.
    bool setup_encoder() {
        const int m = n_ - k_;
        const int words = (n_ + 63) / 64;
        std::vector<std::uint64_t> rows(static_cast<std::size_t>(m) * words, 0);
        auto row_ptr = [&](int i) { return &rows[static_cast<std::size_t>(i) * words]; };
        for (int i = 0; i < m; ++i)
            for (const int v : check_vars_[i]) row_ptr(i)[v >> 6] |= 1ull << (v & 63);

        pivot_cols_.clear();
        std::vector<char> is_pivot_col(n_, 0);
        int rank = 0;
        for (int col = 0; col < n_ && rank < m; ++col) {
            int pivot = -1;
            for (int i = rank; i < m; ++i) {
                if ((row_ptr(i)[col >> 6] >> (col & 63)) & 1ull) {
                    pivot = i;
                    break;
                }
            }
            if (pivot < 0) continue;
            if (pivot != rank)
                for (int w = 0; w < words; ++w) std::swap(row_ptr(pivot)[w], row_ptr(rank)[w]);
            for (int i = 0; i < m; ++i) {
                if (i == rank) continue;
                if ((row_ptr(i)[col >> 6] >> (col & 63)) & 1ull)
                    for (int w = 0; w < words; ++w) row_ptr(i)[w] ^= row_ptr(rank)[w];
            }
            pivot_cols_.push_back(col);
            is_pivot_col[col] = 1;
            ++rank;
        }
        if (rank < m) return false;

        info_cols_.clear();
        for (int col = 0; col < n_; ++col)
            if (!is_pivot_col[col]) info_cols_.push_back(col);

        // parity mask over info columns: p_i = <mask_i, s>
        const int kwords = (k_ + 63) / 64;
        parity_masks_.assign(static_cast<std::size_t>(m) * kwords, 0);
        for (int i = 0; i < m; ++i) {
            std::uint64_t* mask = &parity_masks_[static_cast<std::size_t>(i) * kwords];
            for (int j = 0; j < k_; ++j) {
                const int col = info_cols_[j];
                if ((row_ptr(i)[col >> 6] >> (col & 63)) & 1ull) mask[j >> 6] |= 1ull << (j & 63);
            }
        }
        return true;
    }

    int k_ = 0;
    int n_ = 0;
    std::vector<std::vector<int>> check_vars_;  // H rows as sorted column lists
    std::vector<int> check_offset_;             // flattened edge layout
    std::vector<int> edge_var_;
    std::vector<int> pivot_cols_;
    std::vector<int> info_cols_;
    std::vector<std::uint64_t> parity_masks_;
};

// Process-wide cache: PEG construction and encoder setup are expensive and
// the same three configurations recur across the pipeline and tests.
inline const LdpcCode& shared_code(const LdpcConfig& cfg) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, std::uint64_t>, std::unique_ptr<LdpcCode>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    const auto key = std::make_tuple(cfg.k, cfg.n, cfg.seed);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<LdpcCode>(LdpcCode::build(cfg))).first;
    return *it->second;
}

// Info bits zero-padded to a whole number of blocks, then block-encoded.
struct CodedBlocks {
    std::vector<std::uint8_t> bits;  // block_count * n coded bits
    int block_count = 0;
    int padding_bits = 0;
};

inline CodedBlocks ldpc_encode(std::span<const std::uint8_t> info_bits, const LdpcCode& code) {
    CodedBlocks out;
    out.block_count = static_cast<int>((info_bits.size() + code.k() - 1) / code.k());
    if (out.block_count == 0) out.block_count = 1;
    out.padding_bits = out.block_count * code.k() - static_cast<int>(info_bits.size());
    std::vector<std::uint8_t> block(code.k(), 0);
    for (int b = 0; b < out.block_count; ++b) {
        std::fill(block.begin(), block.end(), 0);
        const std::size_t begin = static_cast<std::size_t>(b) * code.k();
        for (int j = 0; j < code.k(); ++j)
            if (begin + j < info_bits.size()) block[j] = info_bits[begin + j] & 1;
        const auto coded = code.encode(block);
        out.bits.insert(out.bits.end(), coded.begin(), coded.end());
    }
    return out;
}

}  // namespace oarvc

#endif  // OARVC_LDPC_HPP
