#include "riskball/ensemble.hpp"

#include "riskball/parallel.hpp"

namespace riskball::rl {

Ensemble bootstrap_ensemble(const TransitionDataset& dataset, std::size_t n_members,
                            const C51Config& config, std::uint64_t seed, std::size_t jobs,
                            double subset_lo, double subset_hi) {
    if (n_members < 1) throw std::invalid_argument("bootstrap_ensemble: need >= 1 member");
    util::Rng root(seed);

    Ensemble ensemble;
    ensemble.config = config;
    ensemble.members.resize(n_members);
    ensemble.member_patients.resize(n_members);
    std::vector<std::uint64_t> member_seeds(n_members);
    for (std::size_t m = 0; m < n_members; ++m) {
        ensemble.member_patients[m] =
            bootstrap_patient_subset(dataset.episodes.size(), subset_lo, subset_hi, root);
        member_seeds[m] = root.next_u64();
    }
    util::parallel_for(n_members, jobs, [&](std::size_t m) {
        const TransitionDataset member_data = subset_dataset(dataset, ensemble.member_patients[m]);
        ensemble.members[m] = c51_train(member_data, config, member_seeds[m]).network;
    });
    return ensemble;
}

}  // namespace riskball::rl
