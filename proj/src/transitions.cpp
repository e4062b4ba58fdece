#include "riskball/transitions.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "riskball/cohort_csv.hpp"

namespace riskball::rl {

using cohort::Outcome;

const char* reward_kind_name(RewardKind kind) {
    switch (kind) {
        case RewardKind::TerminalOnly: return "terminal";
        case RewardKind::R1: return "r1";
        case RewardKind::R2: return "r2";
    }
    return "?";
}

RewardKind reward_kind_from_name(const std::string& name) {
    if (name == "terminal") return RewardKind::TerminalOnly;
    if (name == "r1") return RewardKind::R1;
    if (name == "r2") return RewardKind::R2;
    throw std::invalid_argument("unknown reward kind '" + name + "' (terminal, r1, r2)");
}

double intermediate_reward(const RewardSpec& spec, double d_s, double d_next) {
    switch (spec.kind) {
        case RewardKind::TerminalOnly: return 0.0;
        case RewardKind::R1: return spec.r1_coeff * (d_s - d_next);
        case RewardKind::R2:
            return spec.r2_coeff * (d_s - d_next) -
                   (d_next > spec.r2_threshold ? spec.r2_penalty * d_next : 0.0);
    }
    throw std::logic_error("intermediate_reward: unknown kind");
}

double terminal_reward(const RewardSpec& spec, Outcome outcome, double d_terminal) {
    if (outcome == Outcome::Death) return spec.terminal_death;
    return spec.terminal_release_scale * (1.0 - d_terminal);
}

double RiskModel::compute_d(const cohort::PatientTrajectory& traj, std::size_t hour) const {
    if (members.empty()) throw std::logic_error("RiskModel: no members");
    double total = 0.0;
    for (const auto& m : members) {
        total += m.squared_norms({{&traj, hour}})[0];
    }
    return total / static_cast<double>(members.size());
}

std::vector<double> RiskModel::compute_d_all(const cohort::Cohort& cohort,
                                             std::vector<std::vector<double>>* embeddings) const {
    if (members.empty()) throw std::logic_error("RiskModel: no members");
    std::vector<embed::StateRef> refs;
    for (const auto& traj : cohort) {
        for (std::size_t t = 0; t < traj.length(); ++t) refs.push_back({&traj, t});
    }
    std::vector<double> d(refs.size(), 0.0);
    for (std::size_t m = 0; m < members.size(); ++m) {
        if (m == 0 && embeddings != nullptr) {
            const nn::Tensor emb = members[0].embed_states(refs);
            const std::size_t dim = members[0].config.embedding_dim;
            embeddings->assign(refs.size(), std::vector<double>(dim, 0.0));
            for (std::size_t i = 0; i < refs.size(); ++i) {
                double sq = 0.0;
                for (std::size_t j = 0; j < dim; ++j) {
                    (*embeddings)[i][j] = emb.at(i, j);
                    sq += emb.at(i, j) * emb.at(i, j);
                }
                d[i] += sq;
            }
        } else {
            const std::vector<double> part = members[m].squared_norms(refs);
            for (std::size_t i = 0; i < refs.size(); ++i) d[i] += part[i];
        }
    }
    for (double& v : d) v /= static_cast<double>(members.size());
    return d;
}

std::size_t RiskModel::min_history() const {
    std::size_t h = 0;
    for (const auto& m : members) h = std::max(h, m.config.min_history());
    return h;
}

std::size_t RiskModel::embedding_dim() const {
    return members.empty() ? 0 : members[0].config.embedding_dim;
}

TransitionDataset build_mdp(const cohort::Cohort& cohort, const RiskModel& risk,
                            const RewardSpec& spec) {
    if (risk.min_history() != 0) {
        throw std::invalid_argument("build_mdp: the risk model must score every hour (MLP members)");
    }
    TransitionDataset out;
    out.embedding_dim = risk.embedding_dim();
    out.d = risk.compute_d_all(cohort, &out.embedding);

    std::size_t state_index = 0;
    for (const auto& traj : cohort) {
        const auto begin = static_cast<std::uint32_t>(out.transitions.size());
        for (std::size_t t = 0; t < traj.length(); ++t) {
            out.states.push_back(traj.states[t].v);
        }
        for (std::size_t t = 0; t + 1 < traj.length(); ++t) {
            Transition tr;
            tr.s = static_cast<std::uint32_t>(state_index + t);
            tr.s_next = static_cast<std::uint32_t>(state_index + t + 1);
            tr.action = static_cast<std::uint8_t>(traj.actions[t].index());
            tr.done = t + 2 == traj.length();
            if (tr.done) {
                tr.reward = terminal_reward(spec, traj.outcome, out.d[tr.s_next]);
            } else {
                tr.reward = intermediate_reward(spec, out.d[tr.s], out.d[tr.s_next]);
            }
            out.transitions.push_back(tr);
        }
        state_index += traj.length();
        out.episodes.emplace_back(begin, static_cast<std::uint32_t>(out.transitions.size()));
        out.episode_outcome.push_back(traj.outcome);
    }
    return out;
}

TransitionDataset subset_dataset(const TransitionDataset& dataset,
                                 const std::vector<std::size_t>& episode_indices) {
    TransitionDataset out;
    out.embedding_dim = dataset.embedding_dim;
    for (std::size_t e : episode_indices) {
        if (e >= dataset.episodes.size()) throw std::invalid_argument("subset_dataset: bad episode");
        const auto [begin, end] = dataset.episodes[e];
        const auto tr_begin = static_cast<std::uint32_t>(out.transitions.size());
        // Remap the touched states into the member-local table.
        std::uint32_t first_state = dataset.transitions[begin].s;
        std::uint32_t last_state = dataset.transitions[end - 1].s_next;
        const auto base = static_cast<std::uint32_t>(out.states.size());
        for (std::uint32_t s = first_state; s <= last_state; ++s) {
            out.states.push_back(dataset.states[s]);
            out.d.push_back(dataset.d[s]);
            out.embedding.push_back(dataset.embedding[s]);
        }
        for (std::uint32_t t = begin; t < end; ++t) {
            Transition tr = dataset.transitions[t];
            tr.s = base + (tr.s - first_state);
            tr.s_next = base + (tr.s_next - first_state);
            out.transitions.push_back(tr);
        }
        out.episodes.emplace_back(tr_begin, static_cast<std::uint32_t>(out.transitions.size()));
        out.episode_outcome.push_back(dataset.episode_outcome[e]);
    }
    return out;
}

void save_transitions_csv(const TransitionDataset& dataset, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("transitions csv: cannot open " + tmp);
        out << "episode,step";
        for (const auto& name : cohort::observed_column_names()) out << ',' << name;
        for (std::size_t k = 0; k < cohort::kAuxDim; ++k) out << ",aux_" << k;
        out << ",vaso,fluids,r,done,d_s,d_s_next\n";
        for (std::size_t e = 0; e < dataset.episodes.size(); ++e) {
            const auto [begin, end] = dataset.episodes[e];
            for (std::uint32_t t = begin; t < end; ++t) {
                const Transition& tr = dataset.transitions[t];
                out << e << ',' << (t - begin + 1);
                for (double v : dataset.states[tr.s]) out << ',' << cohort::format_double(v);
                out << ',' << static_cast<int>(tr.action) / 3 << ','
                    << static_cast<int>(tr.action) % 3 << ',' << cohort::format_double(tr.reward)
                    << ',' << (tr.done ? 1 : 0) << ',' << cohort::format_double(dataset.d[tr.s])
                    << ',' << cohort::format_double(dataset.d[tr.s_next]) << '\n';
            }
        }
        if (!out) throw std::runtime_error("transitions csv: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

LoadedTransitions load_transitions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("transitions csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("transitions csv: empty file " + path);
    LoadedTransitions out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        fields.push_back(cur);
        const std::size_t expected = 2 + cohort::kStateDim + 6;
        if (fields.size() != expected) {
            throw std::runtime_error("transitions csv: row " + std::to_string(row) +
                                     ": wrong column count");
        }
        std::array<double, cohort::kStateDim> s{};
        for (std::size_t c = 0; c < cohort::kStateDim; ++c) {
            s[c] = cohort::parse_double(fields[2 + c], row, "state");
        }
        Transition tr;
        const int vaso = static_cast<int>(cohort::parse_double(fields[2 + cohort::kStateDim], row, "vaso"));
        const int fluids =
            static_cast<int>(cohort::parse_double(fields[3 + cohort::kStateDim], row, "fluids"));
        tr.action = static_cast<std::uint8_t>(3 * vaso + fluids);
        tr.reward = cohort::parse_double(fields[4 + cohort::kStateDim], row, "r");
        tr.done = cohort::parse_double(fields[5 + cohort::kStateDim], row, "done") != 0.0;
        tr.s = static_cast<std::uint32_t>(out.states.size());
        tr.s_next = tr.s;  // source-state view; next states live in their own rows
        out.states.push_back(s);
        out.d_s.push_back(cohort::parse_double(fields[6 + cohort::kStateDim], row, "d_s"));
        out.d_s_next.push_back(cohort::parse_double(fields[7 + cohort::kStateDim], row, "d_s_next"));
        out.transitions.push_back(tr);
    }
    if (out.transitions.empty()) {
        throw std::runtime_error("transitions csv: no rows in " + path);
    }
    return out;
}

}  // namespace riskball::rl
