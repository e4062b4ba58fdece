#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "riskball/rng.hpp"

namespace riskball::cohort {

// 41-dimensional hourly patient state: 27 observed channels in fixed column
// order plus 14 auxiliary channels (4 cardiovascular latent states and a
// 10-d lab-history representation produced upstream).
inline constexpr std::size_t kStateDim = 41;
inline constexpr std::size_t kObservedDim = 27;
inline constexpr std::size_t kAuxDim = 14;

// demographics
inline constexpr std::size_t kAge = 0;
inline constexpr std::size_t kGender = 1;
inline constexpr std::size_t kWeight = 2;
// vitals
inline constexpr std::size_t kHeartRate = 3;
inline constexpr std::size_t kSbp = 4;
inline constexpr std::size_t kDbp = 5;
inline constexpr std::size_t kMap = 6;
inline constexpr std::size_t kTemp = 7;
inline constexpr std::size_t kSpo2 = 8;
inline constexpr std::size_t kRespRate = 9;
// 24-hour organ scores
inline constexpr std::size_t kSofa = 10;
inline constexpr std::size_t kLiver = 11;
inline constexpr std::size_t kRenal = 12;
inline constexpr std::size_t kCns = 13;
inline constexpr std::size_t kCardio = 14;
// labs
inline constexpr std::size_t kAnionGap = 15;
inline constexpr std::size_t kBicarbonate = 16;
inline constexpr std::size_t kCreatinine = 17;
inline constexpr std::size_t kChloride = 18;
inline constexpr std::size_t kGlucose = 19;
inline constexpr std::size_t kHematocrit = 20;
inline constexpr std::size_t kHemoglobin = 21;
inline constexpr std::size_t kPlatelet = 22;
inline constexpr std::size_t kPotassium = 23;
inline constexpr std::size_t kSodium = 24;
inline constexpr std::size_t kBun = 25;
inline constexpr std::size_t kWbc = 26;
inline constexpr std::size_t kAux0 = 27;

// Observed column names in CSV order.
const std::vector<std::string>& observed_column_names();

enum class Outcome : std::uint8_t { Release = 0, Death = 1 };

enum class OrganLabel : std::uint8_t { Cardio = 0, Cns = 1, Liver = 2, Renal = 3 };

const char* organ_name(OrganLabel label);

struct StateVector {
    std::array<double, kStateDim> v{};

    double operator[](std::size_t i) const { return v[i]; }
    double& operator[](std::size_t i) { return v[i]; }

    int sofa() const { return static_cast<int>(v[kSofa]); }
    int organ_score(OrganLabel label) const;

    // Organ subscores in {0..4}, SOFA in {0..24} and at least the worst
    // subscore, everything finite.
    void validate() const;
};

inline bool operator==(const StateVector& a, const StateVector& b) { return a.v == b.v; }

// Worst organ system = highest subscore; ties resolved by the fixed priority
// Cardio > CNS > Liver > Renal so labels are reproducible.
OrganLabel worst_organ(int cardio, int cns, int liver, int renal);
OrganLabel worst_organ(const StateVector& s);

struct ActionPair {
    int vaso = 0;    // {0,1,2}
    int fluids = 0;  // {0,1,2}

    int index() const { return 3 * vaso + fluids; }
    static ActionPair from_index(int idx);
    void validate() const;
};

inline bool operator==(const ActionPair& a, const ActionPair& b) {
    return a.vaso == b.vaso && a.fluids == b.fluids;
}

inline constexpr std::size_t kNumActions = 9;

struct PatientTrajectory {
    std::string patient_id;
    std::vector<StateVector> states;   // one per hour
    std::vector<ActionPair> actions;   // logged treatment at each hour
    Outcome outcome = Outcome::Release;

    std::size_t length() const { return states.size(); }
    void validate() const;
};

bool operator==(const PatientTrajectory& a, const PatientTrajectory& b);

using Cohort = std::vector<PatientTrajectory>;

// Hours-to-end of state i in a stay of length T is T-1-i; a state is within
// the last t hours when that distance is < t.
std::vector<std::size_t> near_terminal_indices(const PatientTrajectory& traj, std::size_t t);

// Patient-level split; no patient contributes states to both sides.
std::pair<Cohort, Cohort> split_cohort(const Cohort& cohort, double train_fraction,
                                       util::Rng& rng);

// Patient-level split that divides each outcome class proportionally, so both
// sides keep both outcomes whenever each class has at least two patients.
// Used for train/validation carving on small cohorts.
std::pair<Cohort, Cohort> stratified_split_cohort(const Cohort& cohort, double train_fraction,
                                                  util::Rng& rng);

std::size_t count_outcome(const Cohort& cohort, Outcome outcome);
std::size_t total_states(const Cohort& cohort);

}  // namespace riskball::cohort
