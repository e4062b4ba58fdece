#include "riskball/risk_model.hpp"

#include <filesystem>
#include <stdexcept>

#include "riskball/parallel.hpp"

namespace riskball::rl {

std::vector<std::size_t> bootstrap_patient_subset(std::size_t n_patients, double lo, double hi,
                                                  util::Rng& rng, double* k_out) {
    if (n_patients < 2) throw std::invalid_argument("bootstrap subset: need >= 2 patients");
    const double k = rng.uniform(lo, hi);
    if (k_out) *k_out = k;
    auto take = static_cast<std::size_t>(k * static_cast<double>(n_patients));
    take = std::min(std::max<std::size_t>(take, 2), n_patients);
    std::vector<std::size_t> order(n_patients);
    for (std::size_t i = 0; i < n_patients; ++i) order[i] = i;
    rng.shuffle(order);
    order.resize(take);
    return order;
}

RiskModel train_risk_model(const cohort::Cohort& train_cohort, const cohort::Cohort& val_cohort,
                           const RiskModelOptions& options, std::uint64_t seed) {
    if (options.members < 1) throw std::invalid_argument("risk model: need >= 1 member");
    util::Rng root(seed);

    // Draw every member's subset and seed up front so members are independent
    // of scheduling order.
    struct MemberPlan {
        std::vector<std::size_t> patients;
        std::uint64_t seed = 0;
    };
    std::vector<MemberPlan> plans(options.members);
    for (auto& plan : plans) {
        plan.patients = bootstrap_patient_subset(train_cohort.size(), options.subset_lo,
                                                 options.subset_hi, root);
        plan.seed = root.next_u64();
    }

    RiskModel model;
    model.members.resize(options.members);
    util::parallel_for(options.members, options.jobs, [&](std::size_t m) {
        cohort::Cohort subset;
        subset.reserve(plans[m].patients.size());
        for (std::size_t p : plans[m].patients) subset.push_back(train_cohort[p]);
        // Bootstrap subsets can lose one outcome class on small cohorts; fall
        // back to the full training cohort rather than failing the member.
        try {
            model.members[m] =
                embed::train_embedding(subset, val_cohort, options.encoder, options.loss, plans[m].seed)
                    .model;
        } catch (const std::runtime_error&) {
            model.members[m] = embed::train_embedding(train_cohort, val_cohort, options.encoder,
                                                      options.loss, plans[m].seed)
                                   .model;
        }
    });
    return model;
}

void save_risk_model(const std::string& dir, const RiskModel& model) {
    std::filesystem::create_directories(dir);
    util::KvMap meta;
    meta["members"] = std::to_string(model.members.size());
    util::save_kv(dir + "/risk_model.txt", meta);
    for (std::size_t m = 0; m < model.members.size(); ++m) {
        embed::save_model(dir + "/member_" + std::to_string(m) + ".ckpt", model.members[m]);
    }
}

RiskModel load_risk_model(const std::string& dir) {
    const util::KvMap meta = util::load_kv(dir + "/risk_model.txt");
    const auto members = static_cast<std::size_t>(util::kv_int(meta, "members"));
    RiskModel model;
    model.members.reserve(members);
    for (std::size_t m = 0; m < members; ++m) {
        model.members.push_back(embed::load_model(dir + "/member_" + std::to_string(m) + ".ckpt"));
    }
    return model;
}

}  // namespace riskball::rl
