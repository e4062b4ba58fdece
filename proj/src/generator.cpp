#include "riskball/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskball::cohort {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

int quantize_score(double load, double noise) {
    const int s = static_cast<int>(std::lround(4.0 * load + noise));
    return std::clamp(s, 0, 4);
}

// Per-patient constants drawn once.
struct PatientProfile {
    bool survivor = true;
    std::size_t hours = 0;
    OrganLabel dominant = OrganLabel::Cardio;
    double risk_base = 0.0;    // early-stay risk level
    double risk_end = 0.0;     // risk level at the terminal hour
    double timescale = 20.0;   // hours of the approach to the terminal level
    double dominant_gain = 0.95;
    std::array<double, 4> organ_gain{};
    double age = 60.0, gender = 0.0, weight = 80.0;
    double extra_gain1 = 0.6, extra_gain2 = 0.6;  // the two SOFA systems not in the state
    // chronic per-patient channel offsets (standardized units)
    std::array<double, kObservedDim> chronic{};
    double hemo_base = 0.0;  // per-patient hemoconcentration level
    // Direction of the deranged channels: high risk can push temperature,
    // glucose, sodium, potassium and WBC either way depending on the patient.
    double dir_temp = 1.0, dir_glucose = 1.0, dir_sodium = 1.0, dir_potassium = 1.0,
           dir_wbc = 1.0;
};

OrganLabel draw_mode(const std::array<double, 4>& mix, util::Rng& rng) {
    double total = mix[0] + mix[1] + mix[2] + mix[3];
    double u = rng.uniform() * total;
    for (int k = 0; k < 4; ++k) {
        if (u < mix[k]) return static_cast<OrganLabel>(k);
        u -= mix[k];
    }
    return OrganLabel::Renal;
}

}  // namespace

void CohortConfig::validate() const {
    if (num_patients < 1) throw std::invalid_argument("CohortConfig: num_patients must be >= 1");
    if (!(survivor_fraction > 0.0 && survivor_fraction < 1.0)) {
        throw std::invalid_argument("CohortConfig: survivor_fraction must be in (0,1)");
    }
    if (min_hours < 13) throw std::invalid_argument("CohortConfig: min_hours must be >= 13");
    if (max_hours < min_hours) throw std::invalid_argument("CohortConfig: max_hours < min_hours");
    if (noise_scale < 0.0 || risk_noise < 0.0) {
        throw std::invalid_argument("CohortConfig: noise scales must be >= 0");
    }
    double mix_total = 0.0;
    for (double w : organ_mix) {
        if (w < 0.0) throw std::invalid_argument("CohortConfig: organ mixture weights must be >= 0");
        mix_total += w;
    }
    if (mix_total <= 0.0) throw std::invalid_argument("CohortConfig: organ mixture sums to zero");
}

CohortWithLatents generate_cohort_with_latents(const CohortConfig& config) {
    config.validate();
    util::Rng rng(config.seed);
    CohortWithLatents out;
    out.cohort.reserve(config.num_patients);
    out.risk.reserve(config.num_patients);

    for (std::size_t pid = 0; pid < config.num_patients; ++pid) {
        PatientProfile prof;
        prof.survivor = rng.uniform() < config.survivor_fraction;
        prof.hours = static_cast<std::size_t>(rng.uniform_int(
            static_cast<std::int64_t>(config.min_hours), static_cast<std::int64_t>(config.max_hours)));
        prof.dominant = draw_mode(config.organ_mix, rng);
        prof.timescale = rng.uniform(14.0, 30.0);
        // Early-stay risk levels overlap across outcomes; the separation
        // develops only as the terminal hour approaches.
        if (prof.survivor) {
            prof.risk_base = rng.uniform(0.28, 0.52);
            prof.risk_end = rng.uniform(0.02, 0.10);
        } else {
            prof.risk_base = rng.uniform(0.25, 0.50);
            prof.risk_end = rng.uniform(0.88, 0.98);
        }
        prof.dominant_gain = rng.uniform(0.88, 1.0);
        for (int k = 0; k < 4; ++k) {
            prof.organ_gain[k] = rng.uniform(0.25, 0.55);
        }
        prof.age = rng.uniform(17.0, 90.0);
        prof.gender = rng.bernoulli(0.5) ? 1.0 : 0.0;
        prof.weight = rng.uniform(45.0, 140.0);
        prof.extra_gain1 = rng.uniform(0.35, 0.85);
        prof.extra_gain2 = rng.uniform(0.35, 0.85);
        for (double& c : prof.chronic) c = rng.normal();
        prof.hemo_base = rng.normal();
        prof.dir_temp = rng.bernoulli(0.65) ? 1.0 : -1.0;
        prof.dir_glucose = rng.bernoulli(0.6) ? 1.0 : -1.0;
        prof.dir_sodium = rng.bernoulli(0.5) ? 1.0 : -1.0;
        prof.dir_potassium = rng.bernoulli(0.55) ? 1.0 : -1.0;
        prof.dir_wbc = rng.bernoulli(0.7) ? 1.0 : -1.0;

        PatientTrajectory traj;
        traj.patient_id = "p" + std::to_string(100000 + pid);
        traj.outcome = prof.survivor ? Outcome::Release : Outcome::Death;
        traj.states.reserve(prof.hours);
        traj.actions.reserve(prof.hours);
        std::vector<double> risk_path;
        risk_path.reserve(prof.hours);

        const double ns = config.noise_scale;
        double walk = 0.0;
        // Shared nuisance processes: autonomic tone, hemoconcentration and a
        // metabolic context. They carry more channel variance than the risk
        // signal, mirroring the heterogeneity of real cohorts, but mix with
        // different sign patterns so the risk stays recoverable.
        double tone = rng.normal();
        double hemo = prof.hemo_base;
        double metab = rng.normal();
        std::array<double, kAuxDim> aux{};
        for (std::size_t t = 0; t < prof.hours; ++t) {
            const double to_end = static_cast<double>(prof.hours - 1 - t);
            const double approach = std::exp(-to_end / prof.timescale);
            const double profile = prof.risk_base + (prof.risk_end - prof.risk_base) * approach;
            const double rho = clamp01(profile + walk);
            risk_path.push_back(rho);

            tone = 0.8 * tone + 0.6 * rng.normal();
            hemo = 0.95 * hemo + 0.2 * rng.normal();
            metab = 0.85 * metab + 0.5 * rng.normal();

            std::array<double, 4> load{};
            for (int k = 0; k < 4; ++k) {
                // The dominant failure mode of a non-survivor is present from
                // admission and strengthens as the terminal hour approaches.
                double gain = prof.organ_gain[k];
                if (!prof.survivor && k == static_cast<int>(prof.dominant)) {
                    const double emerge = 0.6 + 0.4 * std::exp(-to_end / 20.0);
                    gain += (prof.dominant_gain - gain) * emerge;
                }
                load[k] = clamp01(rho * gain + 0.04 * rng.normal());
            }

            StateVector s;
            s[kAge] = prof.age;
            s[kGender] = prof.gender;
            s[kWeight] = prof.weight;

            const double lc = load[static_cast<int>(OrganLabel::Cardio)];
            const double ln = load[static_cast<int>(OrganLabel::Cns)];
            const double ll = load[static_cast<int>(OrganLabel::Liver)];
            const double lr = load[static_cast<int>(OrganLabel::Renal)];
            const auto* ch = prof.chronic.data();

            // Tone raises rate and pressure together; risk raises rate while
            // dropping pressure. The opposed sign pattern keeps them separable.
            s[kHeartRate] = 72.0 + 18.0 * rho + 12.0 * lc + 12.0 * tone + 4.0 * ch[kHeartRate] +
                            ns * 4.0 * rng.normal();
            s[kSbp] = 125.0 - 20.0 * rho - 14.0 * lc + 11.0 * tone + 5.0 * ch[kSbp] +
                      ns * 5.0 * rng.normal();
            s[kDbp] = 74.0 - 12.0 * rho - 8.0 * lc + 7.0 * tone + 3.0 * ch[kDbp] +
                      ns * 3.5 * rng.normal();
            s[kMap] = (s[kSbp] + 2.0 * s[kDbp]) / 3.0 + ns * 2.0 * rng.normal();
            s[kTemp] = 37.0 + prof.dir_temp * 1.6 * rho + 0.8 * ln + 0.45 * tone +
                       0.2 * ch[kTemp] + ns * 0.25 * rng.normal();
            s[kSpo2] = std::min(100.0, 98.5 - 4.0 * rho - 2.5 * ln - 1.2 * tone +
                                           0.7 * ch[kSpo2] + ns * 0.8 * rng.normal());
            s[kRespRate] = 14.0 + 6.0 * rho + 4.0 * ln + 3.0 * tone + 1.5 * ch[kRespRate] +
                           ns * 1.2 * rng.normal();

            const int score_cardio = quantize_score(lc, 0.30 * rng.normal());
            const int score_cns = quantize_score(ln, 0.30 * rng.normal());
            const int score_liver = quantize_score(ll, 0.30 * rng.normal());
            const int score_renal = quantize_score(lr, 0.30 * rng.normal());
            const int extra1 = quantize_score(rho * prof.extra_gain1, 0.25 * rng.normal());
            const int extra2 = quantize_score(rho * prof.extra_gain2, 0.25 * rng.normal());
            s[kCardio] = score_cardio;
            s[kCns] = score_cns;
            s[kLiver] = score_liver;
            s[kRenal] = score_renal;
            s[kSofa] = score_cardio + score_cns + score_liver + score_renal + extra1 + extra2;

            s[kAnionGap] = 10.0 + 4.0 * rho + 3.5 * lc + 3.0 * metab + 1.0 * ch[kAnionGap] +
                           ns * 1.0 * rng.normal();
            s[kBicarbonate] = 26.0 - 5.0 * rho - 3.0 * lc - 3.5 * metab +
                              1.2 * ch[kBicarbonate] + ns * 1.2 * rng.normal();
            s[kCreatinine] = 0.9 + 3.2 * lr + 0.2 * rho + 0.35 * hemo + 0.3 * ch[kCreatinine] +
                             ns * 0.12 * rng.normal();
            s[kChloride] = 103.0 + 2.0 * rho + 3.0 * lr + 3.0 * hemo + 1.5 * ch[kChloride] +
                           ns * 1.5 * rng.normal();
            s[kGlucose] = 112.0 + prof.dir_glucose * 45.0 * rho + 15.0 * ln + 30.0 * metab +
                          10.0 * ch[kGlucose] + ns * 8.0 * rng.normal();
            s[kHematocrit] = 36.0 - 3.0 * rho + 4.0 * hemo + 1.5 * ch[kHematocrit] +
                             ns * 1.2 * rng.normal();
            s[kHemoglobin] = 12.2 - 1.4 * rho - 1.1 * ll + 1.3 * hemo + 0.5 * ch[kHemoglobin] +
                             ns * 0.4 * rng.normal();
            s[kPlatelet] = 238.0 - 100.0 * ll - 20.0 * rho + 40.0 * hemo + 25.0 * ch[kPlatelet] +
                           ns * 12.0 * rng.normal();
            s[kPotassium] = 4.0 + 0.9 * lr + prof.dir_potassium * 0.5 * rho + 0.3 * metab +
                            0.15 * ch[kPotassium] + ns * 0.12 * rng.normal();
            s[kSodium] = 138.5 + prof.dir_sodium * 4.5 * rho + 3.5 * hemo + 1.5 * ch[kSodium] +
                         ns * 1.5 * rng.normal();
            s[kBun] = 18.0 + 24.0 * lr + 4.0 * rho + 5.0 * hemo + 3.0 * ch[kBun] +
                      ns * 2.0 * rng.normal();
            s[kWbc] = 9.0 + prof.dir_wbc * 8.0 * rho + 3.5 * ll + 3.0 * metab +
                      1.5 * ch[kWbc] + ns * 1.0 * rng.normal();

            // Auxiliary channels: exponential moving averages of standardized
            // observed channels, standing in for the upstream representation.
            const double z_map = (s[kMap] - 85.0) / 15.0;
            const double z_hr = (s[kHeartRate] - 85.0) / 25.0;
            const double z_sbp = (s[kSbp] - 110.0) / 25.0;
            const double z_dbp = (s[kDbp] - 65.0) / 15.0;
            const std::array<double, 4> cardio_in = {z_map, z_hr, z_sbp, z_dbp};
            const std::array<double, 10> lab_in = {
                (s[kAnionGap] - 13.0) / 4.0,   (s[kBicarbonate] - 22.0) / 5.0,
                (s[kCreatinine] - 1.6) / 1.3,  (s[kChloride] - 104.0) / 4.0,
                (s[kGlucose] - 135.0) / 45.0,  (s[kHematocrit] - 33.0) / 4.0,
                (s[kHemoglobin] - 11.0) / 1.5, (s[kPlatelet] - 200.0) / 80.0,
                (s[kPotassium] - 4.4) / 0.7,   (s[kSodium] - 140.0) / 4.0};
            const double ema = 0.3;
            for (int k = 0; k < 4; ++k) {
                aux[k] = t == 0 ? cardio_in[k] : (1.0 - ema) * aux[k] + ema * cardio_in[k];
            }
            for (int k = 0; k < 10; ++k) {
                aux[4 + k] = t == 0 ? lab_in[k] : (1.0 - ema) * aux[4 + k] + ema * lab_in[k];
            }
            for (std::size_t k = 0; k < kAuxDim; ++k) s[kAux0 + k] = aux[k];

            // Behavior policy: noisy thresholds on risk with organ-specific bumps.
            ActionPair act;
            const double vaso_drive = rho + 0.25 * lc + 0.10 * rng.normal();
            act.vaso = vaso_drive < 0.45 ? 0 : vaso_drive < 0.78 ? 1 : 2;
            const double fluid_drive = rho + 0.15 * lr + 0.10 * rng.normal();
            act.fluids = fluid_drive < 0.42 ? 0 : fluid_drive < 0.72 ? 1 : 2;
            if (rng.uniform() < 0.06) {
                act.vaso = static_cast<int>(rng.uniform_int(0, 2));
                act.fluids = static_cast<int>(rng.uniform_int(0, 2));
            }

            // Risk-walk update: AR(1) noise plus a small dose-dependent pull
            // downward, stronger for riskier states.
            walk = 0.7 * walk + config.risk_noise * rng.normal() -
                   config.treatment_effect * static_cast<double>(act.vaso + act.fluids) * rho;

            traj.states.push_back(s);
            traj.actions.push_back(act);
        }

        out.cohort.push_back(std::move(traj));
        out.risk.push_back(std::move(risk_path));
    }
    return out;
}

Cohort generate_cohort(const CohortConfig& config) {
    return generate_cohort_with_latents(config).cohort;
}

}  // namespace riskball::cohort
