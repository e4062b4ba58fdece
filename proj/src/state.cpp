#include "riskball/state.hpp"

#include <cmath>
#include <stdexcept>

namespace riskball::cohort {

const std::vector<std::string>& observed_column_names() {
    static const std::vector<std::string> names = {
        "age",        "gender",     "weight",     "heart_rate", "sbp",       "dbp",
        "map",        "temp",       "spo2",       "resp_rate",  "sofa",      "liver",
        "renal",      "cns",        "cardio",     "anion_gap",  "bicarbonate",
        "creatinine", "chloride",   "glucose",    "hematocrit", "hemoglobin",
        "platelet",   "potassium",  "sodium",     "bun",        "wbc"};
    return names;
}

const char* organ_name(OrganLabel label) {
    switch (label) {
        case OrganLabel::Cardio: return "cardio";
        case OrganLabel::Cns: return "cns";
        case OrganLabel::Liver: return "liver";
        case OrganLabel::Renal: return "renal";
    }
    return "?";
}

int StateVector::organ_score(OrganLabel label) const {
    switch (label) {
        case OrganLabel::Cardio: return static_cast<int>(v[kCardio]);
        case OrganLabel::Cns: return static_cast<int>(v[kCns]);
        case OrganLabel::Liver: return static_cast<int>(v[kLiver]);
        case OrganLabel::Renal: return static_cast<int>(v[kRenal]);
    }
    throw std::logic_error("organ_score: unknown label");
}

namespace {

void check_subscore(double value, const char* name) {
    if (value != std::floor(value) || value < 0.0 || value > 4.0) {
        throw std::invalid_argument(std::string("StateVector: ") + name +
                                    " subscore must be an integer in 0..4");
    }
}

}  // namespace

void StateVector::validate() const {
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument("StateVector: non-finite entry");
    }
    check_subscore(v[kLiver], "liver");
    check_subscore(v[kRenal], "renal");
    check_subscore(v[kCns], "cns");
    check_subscore(v[kCardio], "cardio");
    const double sofa = v[kSofa];
    if (sofa != std::floor(sofa) || sofa < 0.0 || sofa > 24.0) {
        throw std::invalid_argument("StateVector: SOFA must be an integer in 0..24");
    }
    const double worst = std::max(std::max(v[kLiver], v[kRenal]), std::max(v[kCns], v[kCardio]));
    if (sofa < worst) {
        throw std::invalid_argument("StateVector: SOFA below the worst organ subscore");
    }
}

OrganLabel worst_organ(int cardio, int cns, int liver, int renal) {
    int best = cardio;
    OrganLabel label = OrganLabel::Cardio;
    if (cns > best) {
        best = cns;
        label = OrganLabel::Cns;
    }
    if (liver > best) {
        best = liver;
        label = OrganLabel::Liver;
    }
    if (renal > best) {
        best = renal;
        label = OrganLabel::Renal;
    }
    return label;
}

OrganLabel worst_organ(const StateVector& s) {
    return worst_organ(static_cast<int>(s[kCardio]), static_cast<int>(s[kCns]),
                       static_cast<int>(s[kLiver]), static_cast<int>(s[kRenal]));
}

ActionPair ActionPair::from_index(int idx) {
    if (idx < 0 || idx > 8) throw std::invalid_argument("ActionPair: index out of range");
    return ActionPair{idx / 3, idx % 3};
}

void ActionPair::validate() const {
    if (vaso < 0 || vaso > 2 || fluids < 0 || fluids > 2) {
        throw std::invalid_argument("ActionPair: doses must be in {0,1,2}");
    }
}

void PatientTrajectory::validate() const {
    if (states.empty()) throw std::invalid_argument("PatientTrajectory: empty stay");
    if (states.size() != actions.size()) {
        throw std::invalid_argument("PatientTrajectory: state/action count mismatch");
    }
    for (const auto& s : states) s.validate();
    for (const auto& a : actions) a.validate();
}

bool operator==(const PatientTrajectory& a, const PatientTrajectory& b) {
    return a.patient_id == b.patient_id && a.outcome == b.outcome && a.states == b.states &&
           a.actions == b.actions;
}

std::vector<std::size_t> near_terminal_indices(const PatientTrajectory& traj, std::size_t t) {
    if (t < 1) throw std::invalid_argument("near_terminal_indices: t must be >= 1");
    const std::size_t n = traj.length();
    const std::size_t first = n > t ? n - t : 0;
    std::vector<std::size_t> out;
    out.reserve(n - first);
    for (std::size_t i = first; i < n; ++i) out.push_back(i);
    return out;
}

std::pair<Cohort, Cohort> split_cohort(const Cohort& cohort, double train_fraction,
                                       util::Rng& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("split_cohort: fraction must be in (0,1)");
    }
    if (cohort.size() < 2) throw std::invalid_argument("split_cohort: need at least 2 patients");
    std::vector<std::size_t> order(cohort.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(cohort.size())));
    n_train = std::min(std::max<std::size_t>(n_train, 1), cohort.size() - 1);
    Cohort train, test;
    train.reserve(n_train);
    test.reserve(cohort.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? train : test).push_back(cohort[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

std::pair<Cohort, Cohort> stratified_split_cohort(const Cohort& cohort, double train_fraction,
                                                  util::Rng& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("stratified_split_cohort: fraction must be in (0,1)");
    }
    std::array<std::vector<std::size_t>, 2> classes;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        classes[static_cast<std::size_t>(cohort[i].outcome)].push_back(i);
    }
    std::vector<char> in_train(cohort.size(), 0);
    for (auto& members : classes) {
        if (members.empty()) continue;
        rng.shuffle(members);
        auto n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(members.size())));
        if (members.size() >= 2) {
            n_train = std::min(std::max<std::size_t>(n_train, 1), members.size() - 1);
        }
        for (std::size_t i = 0; i < n_train; ++i) in_train[members[i]] = 1;
    }
    Cohort train, test;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        (in_train[i] ? train : test).push_back(cohort[i]);
    }
    if (train.empty() || test.empty()) {
        throw std::invalid_argument("stratified_split_cohort: cohort too small to split");
    }
    return {std::move(train), std::move(test)};
}

std::size_t count_outcome(const Cohort& cohort, Outcome outcome) {
    std::size_t n = 0;
    for (const auto& p : cohort) {
        if (p.outcome == outcome) ++n;
    }
    return n;
}

std::size_t total_states(const Cohort& cohort) {
    std::size_t n = 0;
    for (const auto& p : cohort) n += p.length();
    return n;
}

}  // namespace riskball::cohort
