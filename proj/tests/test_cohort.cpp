#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "riskball/cohort_csv.hpp"
#include "riskball/generator.hpp"

using namespace riskball;
using cohort::Outcome;

namespace {

cohort::CohortConfig small_config(std::size_t patients, std::uint64_t seed,
                                  double survivors = 0.8) {
    cohort::CohortConfig c;
    c.num_patients = patients;
    c.survivor_fraction = survivors;
    c.min_hours = 14;
    c.max_hours = 30;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("worst_organ: highest score wins, ties break cardio > cns > liver > renal") {
    using cohort::OrganLabel;
    CHECK(cohort::worst_organ(4, 2, 1, 0) == OrganLabel::Cardio);
    CHECK(cohort::worst_organ(2, 2, 2, 2) == OrganLabel::Cardio);
    CHECK(cohort::worst_organ(0, 3, 1, 3) == OrganLabel::Cns);
    CHECK(cohort::worst_organ(0, 0, 2, 3) == OrganLabel::Renal);
    CHECK(cohort::worst_organ(0, 0, 3, 2) == OrganLabel::Liver);
    // total on every combination
    for (int c = 0; c <= 4; ++c) {
        for (int n = 0; n <= 4; ++n) {
            for (int l = 0; l <= 4; ++l) {
                for (int r = 0; r <= 4; ++r) {
                    const auto lab = cohort::worst_organ(c, n, l, r);
                    CHECK(static_cast<int>(lab) >= 0);
                    CHECK(static_cast<int>(lab) <= 3);
                }
            }
        }
    }
}

TEST_CASE("near_terminal_indices: window arithmetic") {
    cohort::PatientTrajectory traj;
    traj.states.resize(50);
    traj.actions.resize(50);
    auto idx = cohort::near_terminal_indices(traj, 12);
    REQUIRE(idx.size() == 12);
    CHECK(idx.front() == 38);
    CHECK(idx.back() == 49);

    traj.states.resize(5);
    traj.actions.resize(5);
    idx = cohort::near_terminal_indices(traj, 12);
    CHECK(idx.size() == 5);

    idx = cohort::near_terminal_indices(traj, 1);
    REQUIRE(idx.size() == 1);
    CHECK(idx.front() == 4);
}

TEST_CASE("generate_cohort: deterministic, outcome counts near the configured fraction") {
    const auto cfg = small_config(400, 1234, 0.9);
    const cohort::Cohort a = cohort::generate_cohort(cfg);
    const cohort::Cohort b = cohort::generate_cohort(cfg);
    REQUIRE(a.size() == 400);
    CHECK(a == b);

    const std::size_t survivors = cohort::count_outcome(a, Outcome::Release);
    CHECK(survivors >= 340);  // 0.9 * 400 within binomial slack
    CHECK(survivors <= 383);
    for (const auto& traj : a) {
        traj.validate();
        CHECK(traj.length() >= cfg.min_hours);
        CHECK(traj.length() <= cfg.max_hours);
    }
}

TEST_CASE("generate_cohort: latent risk separates outcomes and rises toward death") {
    auto cfg = small_config(400, 77, 0.5);
    cfg.max_hours = 48;
    const auto gen = cohort::generate_cohort_with_latents(cfg);
    double death_final = 0.0, release_final = 0.0;
    std::size_t deaths = 0, releases = 0;
    for (std::size_t p = 0; p < gen.cohort.size(); ++p) {
        if (gen.cohort[p].outcome == Outcome::Death) {
            death_final += gen.risk[p].back();
            ++deaths;
        } else {
            release_final += gen.risk[p].back();
            ++releases;
        }
    }
    REQUIRE(deaths > 0);
    REQUIRE(releases > 0);
    CHECK(death_final / static_cast<double>(deaths) >
          release_final / static_cast<double>(releases));

    // averaged non-survivor risk is non-decreasing over the final 24 hours
    std::array<double, 24> mean_at{};
    std::array<std::size_t, 24> count_at{};
    for (std::size_t p = 0; p < gen.cohort.size(); ++p) {
        if (gen.cohort[p].outcome != Outcome::Death) continue;
        const auto& risk = gen.risk[p];
        for (std::size_t back = 0; back < 24 && back < risk.size(); ++back) {
            mean_at[back] += risk[risk.size() - 1 - back];
            ++count_at[back];
        }
    }
    for (std::size_t back = 0; back + 1 < 24; ++back) {
        REQUIRE(count_at[back] > 0);
        REQUIRE(count_at[back + 1] > 0);
        const double closer = mean_at[back] / static_cast<double>(count_at[back]);
        const double farther = mean_at[back + 1] / static_cast<double>(count_at[back + 1]);
        CHECK(closer >= farther - 1e-9);
    }
}

TEST_CASE("generate_cohort: invalid configs are rejected") {
    cohort::CohortConfig c;
    c.num_patients = 0;
    CHECK_THROWS_AS(cohort::generate_cohort(c), std::invalid_argument);
    c = small_config(5, 1);
    c.min_hours = 12;  // must leave room for a 12-hour history
    CHECK_THROWS_AS(cohort::generate_cohort(c), std::invalid_argument);
    c = small_config(5, 1);
    c.survivor_fraction = 1.0;
    CHECK_THROWS_AS(cohort::generate_cohort(c), std::invalid_argument);
}

TEST_CASE("split_cohort: sizes, disjointness, determinism") {
    const cohort::Cohort cohort = cohort::generate_cohort(small_config(10, 5));
    {
        util::Rng rng(3);
        auto [train, test] = cohort::split_cohort(cohort, 0.8, rng);
        CHECK(train.size() == 8);
        CHECK(test.size() == 2);
    }
    {
        util::Rng a(3), b(3);
        auto [ta, va] = cohort::split_cohort(cohort, 0.8, a);
        auto [tb, vb] = cohort::split_cohort(cohort, 0.8, b);
        CHECK(ta == tb);
        CHECK(va == vb);
    }
    const cohort::Cohort big = cohort::generate_cohort(small_config(40, 6));
    util::Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        auto [train, test] = cohort::split_cohort(big, 0.7, rng);
        std::set<std::string> train_ids;
        for (const auto& t : train) train_ids.insert(t.patient_id);
        for (const auto& t : test) CHECK(train_ids.count(t.patient_id) == 0);
        CHECK(train.size() + test.size() == big.size());
    }
}

TEST_CASE("cohort csv: round trip is exact") {
    const cohort::Cohort cohort = cohort::generate_cohort(small_config(25, 42));
    const std::string path =
        (std::filesystem::temp_directory_path() / "riskball_cohort_roundtrip.csv").string();
    cohort::save_cohort_csv(cohort, path);
    const cohort::Cohort loaded = cohort::load_cohort_csv(path);
    CHECK(loaded == cohort);
    std::filesystem::remove(path);
}

TEST_CASE("cohort csv: malformed inputs raise parse errors naming the problem") {
    const auto dir = std::filesystem::temp_directory_path() / "riskball_csv_errors";
    std::filesystem::create_directories(dir);
    const cohort::Cohort cohort = cohort::generate_cohort(small_config(2, 9));
    const std::string good = (dir / "good.csv").string();
    cohort::save_cohort_csv(cohort, good);

    SUBCASE("organ score out of range") {
        std::ifstream in(good);
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        // rewrite the liver column (index 13 counting patient_id,hour) to 5
        std::vector<std::string> cells;
        std::string cur;
        for (char c : row) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        cells.push_back(cur);
        cells[2 + cohort::kLiver] = "5";
        cells[2 + cohort::kSofa] = "24";
        std::string rebuilt;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) rebuilt += ',';
            rebuilt += cells[i];
        }
        const std::string bad = (dir / "bad_score.csv").string();
        std::ofstream out(bad);
        out << header << '\n' << rebuilt << '\n';
        out.close();
        CHECK_THROWS_WITH_AS(cohort::load_cohort_csv(bad),
                             doctest::Contains("liver"), std::runtime_error);
    }

    SUBCASE("empty file") {
        const std::string empty = (dir / "empty.csv").string();
        std::ofstream(empty).close();
        CHECK_THROWS_AS(cohort::load_cohort_csv(empty), std::runtime_error);
    }

    SUBCASE("header only") {
        const std::string only = (dir / "header_only.csv").string();
        std::ofstream out(only);
        out << cohort::cohort_csv_header() << '\n';
        out.close();
        CHECK_THROWS_WITH_AS(cohort::load_cohort_csv(only), doctest::Contains("no patients"),
                             std::runtime_error);
    }

    SUBCASE("non-monotone hours") {
        std::ifstream in(good);
        std::string header, r1, r2;
        std::getline(in, header);
        std::getline(in, r1);
        std::getline(in, r2);
        const std::string bad = (dir / "bad_hour.csv").string();
        std::ofstream out(bad);
        out << header << '\n' << r1 << '\n' << r1 << '\n';
        out.close();
        CHECK_THROWS_WITH_AS(cohort::load_cohort_csv(bad), doctest::Contains("hour"),
                             std::runtime_error);
    }

    SUBCASE("missing column") {
        std::ifstream in(good);
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        const std::string bad = (dir / "bad_cols.csv").string();
        std::ofstream out(bad);
        out << header << '\n' << row.substr(0, row.rfind(',')) << '\n';
        out.close();
        CHECK_THROWS_WITH_AS(cohort::load_cohort_csv(bad), doctest::Contains("columns"),
                             std::runtime_error);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("trajectories end with exactly one outcome row") {
    const cohort::Cohort cohort = cohort::generate_cohort(small_config(30, 8));
    const std::string path =
        (std::filesystem::temp_directory_path() / "riskball_outcomes.csv").string();
    cohort::save_cohort_csv(cohort, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    std::size_t outcome_rows = 0, rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.ends_with("DEATH") || line.ends_with("RELEASE")) ++outcome_rows;
    }
    CHECK(outcome_rows == cohort.size());
    CHECK(rows == cohort::total_states(cohort));
    std::filesystem::remove(path);
}

TEST_CASE("action pairs map to flattened indices and back") {
    for (int idx = 0; idx < 9; ++idx) {
        const auto a = cohort::ActionPair::from_index(idx);
        CHECK(a.index() == idx);
        CHECK(3 * a.vaso + a.fluids == idx);
    }
    CHECK(cohort::ActionPair{0, 0}.index() == 0);
    CHECK_THROWS_AS(cohort::ActionPair::from_index(9), std::invalid_argument);
}
