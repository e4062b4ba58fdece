#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "commands.hpp"
#include "opt_common.hpp"
#include "riskball/cohort_csv.hpp"
#include "riskball/generator.hpp"

namespace riskball::cli {

namespace {

std::string strip_dashes(const std::string& name) {
    std::size_t i = 0;
    while (i < name.size() && name[i] == '-') ++i;
    return name.substr(i);
}

}  // namespace

util::KvMap options_as_kv(const CLI::App& sub) {
    util::KvMap kv;
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_name().empty()) continue;
        const std::string key = strip_dashes(opt->get_name());
        if (key == "help" || key == "config") continue;
        if (opt->get_expected_min() == 0) {  // flag
            kv[key] = opt->count() > 0 ? "true" : "false";
        } else if (opt->count() > 0) {
            std::string joined;
            for (const auto& r : opt->results()) {
                if (!joined.empty()) joined += ' ';
                joined += r;
            }
            kv[key] = joined;
        } else {
            kv[key] = opt->get_default_str();
        }
    }
    return kv;
}

std::string write_snapshot(const CLI::App& sub, const std::string& out_dir,
                           const std::string& name) {
    std::filesystem::create_directories(out_dir);
    const util::KvMap kv = options_as_kv(sub);
    const std::string hash = util::config_hash_hex(kv);
    // Section header so '<tool> <name> --config <snapshot>' replays the run;
    // values with separators are quoted for the config reader.
    const std::string path = out_dir + "/" + name + "_config.txt";
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("snapshot: cannot open " + tmp);
        out << "[" << name << "]\n";
        for (const auto& [k, v] : kv) {
            const bool quote = v.empty() || v.find_first_of(", ") != std::string::npos;
            out << k << '=' << (quote ? "\"" + v + "\"" : v) << '\n';
        }
    }
    std::filesystem::rename(tmp, path);
    return hash;
}

std::string default_output_root() {
    const char* env = std::getenv("RISKBALL_OUT");
    return env != nullptr && *env != '\0' ? env : "out";
}

void register_generate(CLI::App& app) {
    auto* sub = app.add_subcommand("generate", "write a synthetic cohort CSV");
    auto opts = std::make_shared<cohort::CohortConfig>();
    auto organ_mix = std::make_shared<std::string>("0.35,0.30,0.20,0.15");
    auto out_dir = std::make_shared<std::string>(default_output_root());
    sub->add_option("--patients", opts->num_patients, "number of patients")->required();
    sub->add_option("--seed", opts->seed, "generator seed")->capture_default_str();
    sub->add_option("--survivor-fraction", opts->survivor_fraction, "share of survivors")
        ->capture_default_str();
    sub->add_option("--min-hours", opts->min_hours, "shortest stay (>= 13)")->capture_default_str();
    sub->add_option("--max-hours", opts->max_hours, "longest stay")->capture_default_str();
    sub->add_option("--noise", opts->noise_scale, "vital/lab noise multiplier")
        ->capture_default_str();
    sub->add_option("--risk-noise", opts->risk_noise, "risk walk innovation scale")
        ->capture_default_str();
    sub->add_option("--treatment-effect", opts->treatment_effect,
                    "risk reduction per administered dose")
        ->capture_default_str();
    sub->add_option("--organ-mix", *organ_mix, "dominant-mode weights: cardio,cns,liver,renal")
        ->capture_default_str();
    sub->add_option("--out", *out_dir, "output directory")->capture_default_str();

    sub->callback([sub, opts, organ_mix, out_dir]() {
        const auto mix = parse_double_list(*organ_mix, "--organ-mix");
        if (mix.size() != 4) throw CLI::ValidationError("--organ-mix needs 4 weights");
        for (int i = 0; i < 4; ++i) opts->organ_mix[static_cast<std::size_t>(i)] = mix[static_cast<std::size_t>(i)];
        opts->validate();
        write_snapshot(*sub, *out_dir, "generate");
        const cohort::Cohort cohort = cohort::generate_cohort(*opts);
        const std::string path = *out_dir + "/cohort.csv";
        cohort::save_cohort_csv(cohort, path);
        std::printf("wrote %s (%zu patients, %zu states)\n", path.c_str(), cohort.size(),
                    cohort::total_states(cohort));
    });
}

std::vector<double> parse_double_list(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    std::string cur;
    auto flush = [&]() {
        if (cur.empty()) return;
        try {
            out.push_back(std::stod(cur));
        } catch (const std::exception&) {
            throw CLI::ValidationError(what + ": bad number '" + cur + "'");
        }
        cur.clear();
    };
    for (char c : csv) {
        if (c == ',') {
            flush();
        } else if (c != ' ') {
            cur += c;
        }
    }
    flush();
    return out;
}

std::vector<int> parse_int_list(const std::string& csv, const std::string& what) {
    std::vector<int> out;
    for (double v : parse_double_list(csv, what)) out.push_back(static_cast<int>(v));
    return out;
}

}  // namespace riskball::cli
