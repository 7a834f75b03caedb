// SPDX-License-Identifier: Apache-2.0
#include "cad/codec.hpp"

#include <algorithm>
#include <numeric>

namespace cad {

int TreeCodeConfig::total_bits() const {
    return std::accumulate(data_bits.begin(), data_bits.end(), 0);
}

void TreeCodeConfig::validate() const {
    if (J < 1 || J > 20) throw ConfigError("codec.J must lie in [1, 20]");
    if (Z < 1) throw ConfigError("codec.Z must be >= 1");
    if (static_cast<int>(data_bits.size()) != Z) throw ConfigError("codec needs one q_i per subblock");
    if (data_bits[0] != J) throw ConfigError("codec: the first subblock carries J data bits");
    for (int i = 1; i < Z; ++i)
        if (data_bits[i] < 0 || data_bits[i] >= J)
            throw ConfigError("codec: q_i must lie in [0, J) for i >= 2");
}

TreeCodeConfig TreeCodeConfig::uniform(int J, int Z, int parity, std::uint64_t seed) {
    if (parity < 1 || parity > J) throw ConfigError("codec.parity_bits must lie in [1, J]");
    TreeCodeConfig c;
    c.J = J;
    c.Z = Z;
    c.parity_seed = seed;
    c.data_bits.assign(static_cast<std::size_t>(std::max(Z, 0)), J - parity);
    if (Z > 0) c.data_bits[0] = J;
    c.validate();
    return c;
}

TreeCodeConfig TreeCodeConfig::from_total(int J, int Z, int total, std::uint64_t seed) {
    TreeCodeConfig c;
    c.J = J;
    c.Z = Z;
    c.parity_seed = seed;
    if (Z < 1 || total < J) throw ConfigError("codec.total_bits must be >= J");
    c.data_bits.assign(static_cast<std::size_t>(Z), 0);
    c.data_bits[0] = J;
    if (Z > 1) {
        const int rest = total - J, each = rest / (Z - 1);
        for (int i = 1; i < Z; ++i) c.data_bits[i] = each;
        c.data_bits[Z - 1] += rest - each * (Z - 1);
    } else if (total != J) {
        throw ConfigError("codec: a single subblock carries exactly J bits");
    }
    c.validate();
    return c;
}

TreeCode::TreeCode(TreeCodeConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    offset_.assign(static_cast<std::size_t>(cfg_.Z) + 1, 0);
    for (int i = 0; i < cfg_.Z; ++i) offset_[i + 1] = offset_[i] + cfg_.data_bits[i];
    Stream rng(cfg_.parity_seed, Purpose::Parity);
    G_.resize(static_cast<std::size_t>(cfg_.Z));
    for (int i = 1; i < cfg_.Z; ++i) {
        G_[i].assign(static_cast<std::size_t>(cfg_.parity_bits(i)),
                     std::vector<std::uint8_t>(static_cast<std::size_t>(offset_[i]), 0));
        for (auto& row : G_[i])
            for (auto& g : row) g = static_cast<std::uint8_t>(rng.bits() & 1U);
    }
}

std::uint32_t TreeCode::parity(int i, const Bits& prefix) const {
    std::uint32_t p = 0;
    for (const auto& row : G_[static_cast<std::size_t>(i)]) {
        std::uint8_t acc = 0;
        for (int k = 0; k < offset_[i]; ++k) acc ^= static_cast<std::uint8_t>(row[k] & prefix[k]);
        p = (p << 1) | acc;
    }
    return p;
}

std::vector<std::uint32_t> TreeCode::encode(const Bits& message) const {
    if (static_cast<int>(message.size()) != cfg_.total_bits())
        throw ConfigError("message length does not match the tree code");
    std::vector<std::uint32_t> slots(static_cast<std::size_t>(cfg_.Z));
    for (int i = 0; i < cfg_.Z; ++i) {
        std::uint32_t v = 0;
        for (int k = offset_[i]; k < offset_[i + 1]; ++k) v = (v << 1) | (message[k] & 1U);
        slots[i] = (i == 0) ? v : ((v << cfg_.parity_bits(i)) | parity(i, message));
    }
    return slots;
}

Bits TreeCode::data_bits(const std::vector<std::uint32_t>& slots) const {
    if (static_cast<int>(slots.size()) != cfg_.Z) throw DomainError("one slot per subblock");
    Bits m(static_cast<std::size_t>(cfg_.total_bits()), 0);
    for (int i = 0; i < cfg_.Z; ++i) {
        std::uint32_t v = slots[i] >> (i == 0 ? 0 : cfg_.parity_bits(i));
        for (int k = offset_[i + 1] - 1; k >= offset_[i]; --k, v >>= 1)
            m[k] = static_cast<std::uint8_t>(v & 1U);
    }
    return m;
}

bool TreeCode::consistent(const std::vector<std::uint32_t>& slots) const {
    const Bits m = data_bits(slots);
    for (int i = 1; i < cfg_.Z; ++i) {
        const std::uint32_t mask = (1U << cfg_.parity_bits(i)) - 1U;
        if ((slots[i] & mask) != parity(i, m)) return false;
    }
    return true;
}

std::vector<Bits> TreeCode::decode(const std::vector<SlotSet>& slot_sets) const {
    if (static_cast<int>(slot_sets.size()) != cfg_.Z)
        throw DomainError("decode needs one candidate set per subblock");
    std::vector<Bits> out;
    Bits path(static_cast<std::size_t>(cfg_.total_bits()), 0);
    const std::uint32_t limit = 1U << cfg_.J;

    // recursive DFS; depth is Z
    auto dfs = [&](auto&& self, int i) -> void {
        if (i == cfg_.Z) {
            out.push_back(path);
            return;
        }
        const int pb = (i == 0) ? 0 : cfg_.parity_bits(i);
        const std::uint32_t want = (i == 0) ? 0 : parity(i, path);
        for (std::uint32_t s : slot_sets[i]) {
            if (s >= limit) continue;
            if (i > 0 && (s & ((1U << pb) - 1U)) != want) continue;
            const std::uint32_t data = s >> pb;
            for (int k = offset_[i + 1] - 1, v = static_cast<int>(data); k >= offset_[i]; --k, v >>= 1)
                path[k] = static_cast<std::uint8_t>(v & 1);
            self(self, i + 1);
        }
    };
    dfs(dfs, 0);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Bits random_message(int bits, Stream& rng) {
    Bits m(static_cast<std::size_t>(bits));
    for (auto& b : m) b = static_cast<std::uint8_t>(rng.bits() & 1U);
    return m;
}

std::string to_string(const Bits& m) {
    std::string s;
    s.reserve(m.size());
    for (auto b : m) s.push_back(b ? '1' : '0');
    return s;
}

SubblockSignal synthesize_subblock(const CMat& codebook, const std::vector<std::uint32_t>& slots,
                                   const std::vector<double>& gains, int M, double sigma2,
                                   Stream& rng) {
    if (slots.size() != gains.size()) throw DomainError("one gain per active device");
    SubblockSignal out;
    out.truth = Vec::Zero(codebook.cols());
    for (std::size_t k = 0; k < slots.size(); ++k) {
        if (slots[k] >= static_cast<std::uint32_t>(codebook.cols()))
            throw DomainError("slot index out of range");
        out.truth(slots[k]) += gains[k];
    }
    out.received = synthesize_received(codebook, out.truth, M, sigma2, rng);
    return out;
}

SlotSet select_active_slots(const Vec& gamma_hat, double sigma2, double nu) {
    if (!(nu > 0)) throw ConfigError("nu must be > 0");
    SlotSet s;
    for (Eigen::Index r = 0; r < gamma_hat.size(); ++r)
        if (gamma_hat(r) >= nu * sigma2) s.push_back(static_cast<std::uint32_t>(r));
    return s;
}

std::vector<Vec> inner_decode(std::shared_ptr<const CMat> codebook,
                              const std::vector<CMat>& sample_cov, double sigma2,
                              const NeighborSets& neighbors, const SolverConfig& cfg,
                              std::uint64_t seed, long* grad_evals) {
    CadProblem p;
    p.S = std::move(codebook);
    p.sample_cov = sample_cov;
    p.sigma2 = sigma2;
    p.neighbors = neighbors;
    auto r = run_cad(p, cfg, seed);
    if (grad_evals) *grad_evals += r.trace.grad_evals;
    return r.gamma;
}

UnsourcedMetrics unsourced_metrics(const std::vector<Bits>& sent,
                                   const std::vector<std::vector<Bits>>& lists) {
    const std::set<Bits> truth(sent.begin(), sent.end());
    UnsourcedMetrics m;
    for (const auto& list : lists) {
        const std::set<Bits> L(list.begin(), list.end());
        double md = 0, fa = 0;
        if (!sent.empty()) {
            long miss = 0;
            for (const auto& s : sent)
                if (!L.count(s)) ++miss;
            md = static_cast<double>(miss) / static_cast<double>(sent.size());
        }
        if (!L.empty()) {
            long bad = 0;
            for (const auto& x : L)
                if (!truth.count(x)) ++bad;
            fa = static_cast<double>(bad) / static_cast<double>(L.size());
        }
        m.p_md.push_back(md);
        m.p_fa.push_back(fa);
        m.p_e += md + fa;
    }
    if (!lists.empty()) m.p_e /= static_cast<double>(lists.size());
    return m;
}

}  // namespace cad
