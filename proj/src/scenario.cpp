// SPDX-License-Identifier: Apache-2.0
#include "cad/scenario.hpp"

#include <algorithm>

namespace cad {

void SignalConfig::validate(int N) const {
    if (activity != "fixed" && activity != "bernoulli")
        throw ConfigError("signal.activity must be \"fixed\" or \"bernoulli\"");
    if (activity == "fixed" && (K < 0 || K > N)) throw ConfigError("signal.K must lie in [0, N]");
    if (activity == "bernoulli" && !(activity_prob >= 0 && activity_prob <= 1))
        throw ConfigError("signal.activity_prob must lie in [0, 1]");
    if (L < 1) throw ConfigError("signal.L must be >= 1");
    if (M < 1) throw ConfigError("signal.M must be >= 1");
    if (!(sigma2 > 0)) throw ConfigError("signal.sigma2 must be > 0");
}

CadProblem SourcedInstance::problem() const { return problem(topology.neighbors); }

CadProblem SourcedInstance::problem(const NeighborSets& nb) const {
    CadProblem p;
    p.S = S;
    p.sample_cov = sample_cov;
    p.sigma2 = sigma2;
    p.neighbors = nb;
    return p;
}

SourcedInstance make_sourced_instance(const TopologyConfig& topo, const SignalConfig& sig,
                                      std::uint64_t trial_seed) {
    topo.validate();
    sig.validate(topo.N);
    SourcedInstance inst;
    Stream trng(trial_seed, Purpose::Topology);
    inst.topology = build_topology(topo, trng);
    inst.sigma2 = sig.sigma2;
    inst.gains = normalize_gains(inst.topology.gains, sig.snr_db, sig.sigma2);
    Stream arng(trial_seed, Purpose::Activity);
    inst.activity = sig.activity == "fixed" ? sample_activity(topo.N, sig.K, arng)
                                            : sample_activity_bernoulli(topo.N, sig.activity_prob, arng);
    Stream srng(trial_seed, Purpose::Signatures);
    inst.S = std::make_shared<const CMat>(generate_signatures(sig.L, topo.N, srng));
    for (int b = 0; b < topo.B; ++b) {
        Stream crng(trial_seed, Purpose::Channel, static_cast<std::uint64_t>(b));
        const Vec g = true_state_vector(inst.gains, inst.activity, b);
        inst.sample_cov.push_back(
            sample_covariance(synthesize_received(*inst.S, g, sig.M, sig.sigma2, crng).samples));
    }
    return inst;
}

TreeCodeConfig CodecConfig::tree() const {
    if (data_bits.empty()) return TreeCodeConfig::uniform(J, Z, parity_bits, parity_seed);
    TreeCodeConfig c;
    c.J = J;
    c.Z = Z;
    c.data_bits = data_bits;
    c.parity_seed = parity_seed;
    c.validate();
    return c;
}

void CodecConfig::validate() const {
    tree();
    if (!(nu > 0)) throw ConfigError("codec.nu must be > 0");
}

UnsourcedTrial run_unsourced_trial(const TopologyConfig& topo_in, const SignalConfig& sig,
                                   const CodecConfig& codec, const SolverConfig& solver,
                                   const NeighborSets* neighbors, std::uint64_t trial_seed) {
    codec.validate();
    TopologyConfig topo = topo_in;
    topo.N = std::max(sig.K, 1);
    topo.validate();
    SignalConfig fixed = sig;
    fixed.activity = "fixed";
    fixed.validate(sig.K);

    Stream trng(trial_seed, Purpose::Topology);
    const Topology t = build_topology(topo, trng);
    const Mat gains = normalize_gains(t.gains, sig.snr_db, sig.sigma2);
    const NeighborSets& nb = neighbors ? *neighbors : t.neighbors;

    const TreeCode code(codec.tree());
    UnsourcedTrial out;
    Stream mrng(trial_seed, Purpose::Messages);
    std::vector<std::vector<std::uint32_t>> slots;  // [device][subblock]
    for (int k = 0; k < sig.K; ++k) {
        out.sent.push_back(random_message(code.config().total_bits(), mrng));
        slots.push_back(code.encode(out.sent.back()));
    }

    Stream srng(trial_seed, Purpose::Signatures);
    const auto S = std::make_shared<const CMat>(generate_signatures(sig.L, 1 << codec.J, srng, true));

    const int B = topo.B;
    std::vector<std::vector<SlotSet>> sets(static_cast<std::size_t>(B));
    for (int i = 0; i < codec.Z; ++i) {
        std::vector<std::uint32_t> si;
        for (const auto& d : slots) si.push_back(d[static_cast<std::size_t>(i)]);
        std::vector<CMat> cov;
        for (int b = 0; b < B; ++b) {
            std::vector<double> g;
            for (int k = 0; k < sig.K; ++k) g.push_back(gains(b, k));
            Stream crng(trial_seed, Purpose::Channel, static_cast<std::uint64_t>(b * codec.Z + i));
            cov.push_back(sample_covariance(
                synthesize_subblock(*S, si, g, sig.M, sig.sigma2, crng).received.samples));
        }
        const auto est = inner_decode(S, cov, sig.sigma2, nb, solver,
                                      derive_seed(trial_seed, {static_cast<std::uint64_t>(i)}),
                                      &out.grad_evals);
        for (int b = 0; b < B; ++b) sets[b].push_back(select_active_slots(est[b], sig.sigma2, codec.nu));
    }
    for (int b = 0; b < B; ++b) out.lists.push_back(code.decode(sets[b]));
    out.metrics = unsourced_metrics(out.sent, out.lists);
    return out;
}

}  // namespace cad
