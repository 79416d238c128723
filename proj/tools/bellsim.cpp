// bellsim: analytic values, Monte Carlo runs and detection-loophole tables
// for two-wing correlation tests, reported as JSON or CSV.
//
// Exit codes: 0 success, 2 usage or validation error, 3 statistical
// self-check failure, 1 unexpected internal error.
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bellsim/report.hpp"

namespace {

constexpr double self_check_z_limit = 5.0;
constexpr double z_cap = 9e99;

// Flat key = value config support: keys equal long flag names. Values from
// the file are injected as --key=value tokens for every key not already on
// the command line, so explicit flags always win.
std::vector<std::string> with_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);

    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& tok = args[i];
        if (tok == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (tok.rfind("--config=", 0) == 0)
            config_path = tok.substr(9);
    }
    if (config_path.empty()) return args;

    std::ifstream file(config_path);
    if (!file) throw bellsim::validation_error("cannot open config file: " + config_path);

    auto trim = [](std::string s) {
        const auto from = s.find_first_not_of(" \t\r");
        const auto to = s.find_last_not_of(" \t\r");
        return from == std::string::npos ? std::string() : s.substr(from, to - from + 1);
    };

    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    while (std::getline(file, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw bellsim::validation_error("config line is not key = value: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw bellsim::validation_error("config line has empty key: " + line);
        entries.emplace_back(key, value);
    }

    auto given = [&args](const std::string& key) {
        const std::string flag = "--" + key;
        for (const std::string& tok : args) {
            if (tok == flag || tok.rfind(flag + "=", 0) == 0) return true;
        }
        return false;
    };

    for (const auto& [key, value] : entries) {
        if (!given(key)) args.push_back("--" + key + "=" + value);
    }
    return args;
}

struct SettingsFlags {
    CLI::Option* optimal = nullptr;
    std::array<CLI::Option*, 4> radians{};
    std::array<CLI::Option*, 4> degrees{};
    std::array<double, 4> rad_values{};
    std::array<double, 4> deg_values{};

    void add_to(CLI::App* cmd) {
        optimal = cmd->add_flag("--optimal",
                                "use the settings quad that maximizes the entangled-model S");
        static constexpr std::array<const char*, 4> names{"a", "b", "c", "d"};
        for (int i = 0; i < 4; ++i) {
            radians[i] = cmd->add_option(std::string("--") + names[i], rad_values[i],
                                         std::string("analyzer angle ") + names[i] + " in radians");
            degrees[i] = cmd->add_option(std::string("--") + names[i] + "-deg", deg_values[i],
                                         std::string("analyzer angle ") + names[i] + " in degrees");
        }
    }

    bellsim::SettingsQuad resolve() const {
        int n_rad = 0;
        int n_deg = 0;
        for (int i = 0; i < 4; ++i) {
            n_rad += radians[i]->count() > 0;
            n_deg += degrees[i]->count() > 0;
        }
        const bool opt = optimal->count() > 0;
        if (opt && (n_rad > 0 || n_deg > 0))
            throw bellsim::validation_error("--optimal excludes explicit angles");
        if (n_rad > 0 && n_deg > 0)
            throw bellsim::validation_error("mixing radian and degree angle flags is not allowed");
        if (opt) return bellsim::optimal_qm_settings();
        if (n_rad == 4)
            return {rad_values[0], rad_values[1], rad_values[2], rad_values[3]};
        if (n_deg == 4) {
            constexpr double rad_per_deg = std::numbers::pi / 180.0;
            return {deg_values[0] * rad_per_deg, deg_values[1] * rad_per_deg,
                    deg_values[2] * rad_per_deg, deg_values[3] * rad_per_deg};
        }
        throw bellsim::validation_error(
            "settings required: --optimal, all of --a/--b/--c/--d, or all of --a-deg/--b-deg/"
            "--c-deg/--d-deg");
    }
};

struct NoiseFlags {
    CLI::Option* uniform = nullptr;
    std::array<CLI::Option*, 4> per_channel{};
    double uniform_value = 0.0;
    std::array<double, 4> values{};

    void add_to(CLI::App* cmd) {
        uniform = cmd->add_option("--eps", uniform_value,
                                  "flip rate applied to all four channels");
        for (int i = 0; i < 4; ++i) {
            per_channel[i] =
                cmd->add_option("--eps" + std::to_string(i + 1), values[i],
                                "flip rate for channel " + std::to_string(i + 1));
        }
    }

    std::optional<bellsim::NoiseQuad> resolve() const {
        int n = 0;
        for (const CLI::Option* o : per_channel) n += o->count() > 0;
        if (uniform->count() > 0 && n > 0)
            throw bellsim::validation_error("--eps excludes --eps1/--eps2/--eps3/--eps4");
        if (uniform->count() > 0) return bellsim::NoiseQuad::uniform(uniform_value);
        if (n == 4) return bellsim::NoiseQuad(values[0], values[1], values[2], values[3]);
        if (n != 0)
            throw bellsim::validation_error("give all four of --eps1/--eps2/--eps3/--eps4");
        return std::nullopt;
    }
};

std::uint64_t default_seed(const CLI::Option* seed_opt, std::uint64_t flag_value) {
    if (seed_opt->count() > 0) return flag_value;
    if (const char* env = std::getenv("BELLSIM_SEED")) {
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (errno != 0 || end == env || *end != '\0' || std::string(env).find('-') != std::string::npos)
            throw bellsim::validation_error(std::string("BELLSIM_SEED is not a valid seed: ") + env);
        return v;
    }
    return 0;
}

bellsim::ModelKind parse_model(const std::string& name) {
    if (name == "qm") return bellsim::ModelKind::qm;
    if (name == "lhv-ref") return bellsim::ModelKind::lhv_reference;
    throw bellsim::validation_error("unknown model: " + name);
}

double z_score(double empirical, double analytic, double se) {
    const double diff = std::abs(empirical - analytic);
    if (diff == 0.0) return 0.0;
    if (se <= 0.0) return z_cap;
    return std::min(diff / se, z_cap);
}

bellsim::CorrelationSet analytic_correlations(bellsim::ModelKind model,
                                              const bellsim::SettingsQuad& settings,
                                              std::uint64_t resolution,
                                              const std::optional<bellsim::NoiseQuad>& noise) {
    bellsim::CorrelationSet corr =
        model == bellsim::ModelKind::qm
            ? bellsim::qm_correlations(settings)
            : bellsim::lhv_correlations(bellsim::reference_lhv_model(), settings, resolution);
    if (noise) {
        for (bellsim::SettingPair p : bellsim::all_setting_pairs) {
            const double e = bellsim::correlation_for(corr, p);
            bellsim::set_correlation(
                corr, p,
                bellsim::noisy_correlation(e, noise->wing_i_rate(p), noise->wing_ii_rate(p)));
        }
    }
    return corr;
}

void emit(const bellsim::OrderedJson& report, const std::string& format) {
    std::cout << (format == "csv" ? bellsim::dump_csv(report) : bellsim::dump_json(report));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bell-test correlation analysis and simulation"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string format = "json";
    std::string config_path;
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    app.add_option("--config", config_path, "flat key = value file; flags override its entries");

    // analytic
    CLI::App* analytic = app.add_subcommand("analytic", "closed-form joints, correlations and S");
    std::string analytic_model;
    std::uint64_t analytic_resolution = 100000;
    SettingsFlags analytic_settings;
    NoiseFlags analytic_noise;
    analytic->add_option("--model", analytic_model, "qm or lhv-ref")->required();
    analytic_settings.add_to(analytic);
    analytic_noise.add_to(analytic);
    analytic->add_option("--resolution", analytic_resolution,
                         "quadrature nodes for the hidden-variable average");

    // simulate
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo run with self-check");
    std::string sim_model;
    std::uint64_t sim_trials = 0;
    std::uint64_t sim_seed = 0;
    unsigned sim_shards = 1;
    std::uint64_t sim_resolution = 100000;
    double sim_delta_a = 0.0;
    double sim_delta_b = 0.0;
    SettingsFlags sim_settings;
    NoiseFlags sim_noise;
    simulate->add_option("--model", sim_model, "qm or lhv-ref")->required();
    simulate->add_option("--trials", sim_trials, "pairs emitted per setting pair")->required();
    CLI::Option* sim_seed_opt = simulate->add_option("--seed", sim_seed, "RNG seed");
    simulate->add_option("--shards", sim_shards, "worker count (never changes results)");
    sim_settings.add_to(simulate);
    sim_noise.add_to(simulate);
    CLI::Option* sim_da = simulate->add_option("--delta-a", sim_delta_a, "wing-I erasure rate");
    CLI::Option* sim_db = simulate->add_option("--delta-b", sim_delta_b, "wing-II erasure rate");
    simulate->add_option("--resolution", sim_resolution,
                         "quadrature nodes for the analytic reference");

    // coin
    CLI::App* coin = app.add_subcommand("coin", "faulty-link coin apparatus");
    double coin_eps = 0.0;
    std::uint64_t coin_trials = 0;
    std::uint64_t coin_seed = 0;
    unsigned coin_shards = 1;
    coin->add_option("--eps", coin_eps, "drop rate of the faulty link")->required();
    CLI::Option* coin_trials_opt =
        coin->add_option("--trials", coin_trials, "also run this many cuts");
    CLI::Option* coin_seed_opt = coin->add_option("--seed", coin_seed, "RNG seed");
    coin->add_option("--shards", coin_shards, "worker count (never changes results)");

    // loopholes
    CLI::App* loopholes = app.add_subcommand("loopholes", "sampling and detection analysis");
    loopholes->fallthrough();
    loopholes->require_subcommand(1);

    CLI::App* fair = loopholes->add_subcommand(
        "fair-sampling", "balanced-sample probabilities for a two-class ensemble");
    std::uint64_t fair_n_pairs = 0;
    double fair_phi = 0.0;
    fair->add_option("--n-pairs", fair_n_pairs, "emitted pair count N")->required();
    fair->add_option("--phi", fair_phi, "detected fraction")->required();

    CLI::App* sdr = loopholes->add_subcommand(
        "s-delta-range", "attainable range of the detection-weighted statistic");
    std::vector<double> sdr_corr;
    sdr->add_option("--corr", sdr_corr, "four correlations ab,ad,cb,cd")
        ->delimiter(',')
        ->expected(4)
        ->required();

    CLI::App* overlap = loopholes->add_subcommand(
        "overlap", "probability that two runs share their hidden-variable draws");
    std::uint64_t overlap_n = 0;
    std::vector<std::uint64_t> overlap_ntots;
    overlap->add_option("--n", overlap_n, "draws per run")->required();
    overlap->add_option("--ntot-list", overlap_ntots, "ascending value-space sizes")
        ->delimiter(',')
        ->required();

    CLI::App* threshold = loopholes->add_subcommand(
        "threshold", "flip rate at which a violation degrades to the classical bound");
    double threshold_s = 0.0;
    threshold->add_option("--s-ideal", threshold_s, "noise-free S, must exceed 2")->required();

    try {
        const std::vector<std::string> raw_args = with_config_args(argc, argv);
        // CLI11 consumes arguments in reverse order.
        std::vector<std::string> parse_args(raw_args.rbegin(), raw_args.rend());
        try {
            app.parse(parse_args);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }

        if (*analytic) {
            const bellsim::ModelKind model = parse_model(analytic_model);
            const bellsim::SettingsQuad settings = analytic_settings.resolve();
            const std::optional<bellsim::NoiseQuad> noise = analytic_noise.resolve();

            bellsim::OrderedJson joints;
            for (bellsim::SettingPair p : bellsim::all_setting_pairs) {
                const double si = bellsim::wing_i_setting(p, settings);
                const double sii = bellsim::wing_ii_setting(p, settings);
                const bellsim::JointDistribution joint =
                    model == bellsim::ModelKind::qm
                        ? bellsim::qm_joint(si, sii)
                        : bellsim::lhv_joint(bellsim::reference_lhv_model(), si, sii,
                                             analytic_resolution);
                joints[std::string(bellsim::to_string(p))] = bellsim::report_json(joint);
            }
            const bellsim::CorrelationSet corr =
                analytic_correlations(model, settings, analytic_resolution, std::nullopt);

            bellsim::OrderedJson inputs;
            inputs["model"] = std::string(bellsim::to_string(model));
            inputs["settings"] = bellsim::report_json(settings);
            if (model == bellsim::ModelKind::lhv_reference)
                inputs["resolution"] = analytic_resolution;
            if (noise) inputs["noise"] = bellsim::report_json(*noise);

            bellsim::OrderedJson results;
            results["joints"] = joints;
            results["correlations"] = bellsim::report_json(corr);
            results["s"] = bellsim::chsh(corr).value;
            if (noise) results["s_epsilon"] = bellsim::s_epsilon(corr, *noise).value;

            emit(bellsim::make_report("analytic", inputs, results, std::nullopt), format);
            return 0;
        }

        if (*simulate) {
            bellsim::RunConfig config;
            config.model = parse_model(sim_model);
            config.settings = sim_settings.resolve();
            config.trials = sim_trials;
            config.seed = default_seed(sim_seed_opt, sim_seed);
            config.shards = sim_shards;
            config.noise = sim_noise.resolve();
            if (sim_da->count() != sim_db->count())
                throw bellsim::validation_error("give both --delta-a and --delta-b or neither");
            if (sim_da->count() > 0)
                config.erasure = bellsim::ErasureRates(sim_delta_a, sim_delta_b);

            std::cerr << "simulate: " << config.trials << " trials per setting pair\n";
            const bellsim::RunStats stats = bellsim::run(config);

            const bellsim::CorrelationSet analytic_corr =
                analytic_correlations(config.model, config.settings, sim_resolution,
                                      config.noise);

            bellsim::OrderedJson z;
            double max_z = 0.0;
            for (bellsim::SettingPair p : bellsim::all_setting_pairs) {
                const double zp = z_score(stats.pair(p).empirical_correlation(),
                                          bellsim::correlation_for(analytic_corr, p),
                                          stats.pair(p).correlation_standard_error());
                z[std::string(bellsim::to_string(p))] = zp;
                max_z = std::max(max_z, zp);
            }

            bellsim::OrderedJson inputs;
            inputs["model"] = std::string(bellsim::to_string(config.model));
            inputs["settings"] = bellsim::report_json(config.settings);
            inputs["trials"] = config.trials;
            inputs["seed"] = config.seed;
            if (config.model == bellsim::ModelKind::lhv_reference)
                inputs["resolution"] = sim_resolution;
            if (config.noise) inputs["noise"] = bellsim::report_json(*config.noise);
            if (config.erasure) inputs["erasure"] = bellsim::report_json(*config.erasure);

            bellsim::OrderedJson results;
            results["run"] = bellsim::report_json(stats);
            bellsim::OrderedJson analytic_block;
            analytic_block["correlations"] = bellsim::report_json(analytic_corr);
            analytic_block["s"] = bellsim::chsh(analytic_corr).value;
            if (config.erasure)
                analytic_block["coincidence_rate"] =
                    bellsim::joint_detection_prob(*config.erasure);
            results["analytic"] = analytic_block;
            results["z"] = z;
            results["max_z"] = max_z;
            const bool ok = max_z <= self_check_z_limit;
            results["self_check_passed"] = ok;

            emit(bellsim::make_report("simulate", inputs, results, config.seed), format);
            return ok ? 0 : 3;
        }

        if (*coin) {
            const bellsim::FaultSpec fault(coin_eps);

            bellsim::OrderedJson counter_joints;
            for (bellsim::SettingPair p : bellsim::all_setting_pairs) {
                counter_joints[std::string(bellsim::to_string(p))] =
                    bellsim::report_json(bellsim::counter_joint(p, fault));
            }
            bellsim::CorrelationSet corr;
            for (bellsim::SettingPair p : bellsim::all_setting_pairs) {
                bellsim::set_correlation(
                    corr, p, bellsim::correlation(bellsim::counter_joint(p, fault)));
            }

            const bool with_trials = coin_trials_opt->count() > 0;
            const std::uint64_t seed = default_seed(coin_seed_opt, coin_seed);

            bellsim::OrderedJson inputs;
            inputs["eps"] = coin_eps;
            if (with_trials) {
                inputs["trials"] = coin_trials;
                inputs["seed"] = seed;
            }

            bellsim::OrderedJson analytic_block;
            analytic_block["camera_joint"] =
                bellsim::report_json(bellsim::camera_joint(bellsim::SettingPair::ab));
            analytic_block["counter_joints"] = counter_joints;
            analytic_block["correlations"] = bellsim::report_json(corr);
            analytic_block["s"] = bellsim::coin_s(coin_eps).value;

            bellsim::OrderedJson results;
            results["analytic"] = analytic_block;
            if (with_trials) {
                std::cerr << "coin: " << coin_trials << " cuts\n";
                results["empirical"] = bellsim::report_json(
                    bellsim::simulate_coin(coin_trials, fault, seed, coin_shards));
            }

            emit(bellsim::make_report("coin", inputs, results,
                                      with_trials ? std::optional(seed) : std::nullopt),
                 format);
            return 0;
        }

        if (*fair) {
            const bellsim::SampleSpec spec(fair_n_pairs, fair_phi);
            bellsim::OrderedJson inputs{{"n_pairs", spec.n_pairs()},
                                        {"phi", spec.detected_fraction()},
                                        {"detected_per_class", spec.detected_per_class()}};
            bellsim::OrderedJson results{
                {"equilibrate_log_prob", bellsim::equilibrate_sampling_log_prob(spec)},
                {"hypergeometric_log_prob", bellsim::hypergeometric_balanced_log_prob(spec)}};
            emit(bellsim::make_report("loopholes fair-sampling", inputs, results, std::nullopt),
                 format);
            return 0;
        }

        if (*sdr) {
            const bellsim::CorrelationSet corr{sdr_corr[0], sdr_corr[1], sdr_corr[2],
                                               sdr_corr[3]};
            const bellsim::SDeltaRange range = bellsim::s_delta_range(corr);
            bellsim::OrderedJson inputs{{"correlations", bellsim::report_json(corr)}};
            bellsim::OrderedJson results;
            results["low"] = range.low;
            results["high"] = range.high;
            results["high_witness"] = bellsim::report_json(range.high_witness);
            results["witness_s"] = bellsim::s_delta(corr, range.high_witness).value;
            emit(bellsim::make_report("loopholes s-delta-range", inputs, results, std::nullopt),
                 format);
            return 0;
        }

        if (*overlap) {
            const std::vector<double> log_probs =
                bellsim::overlap_limit_scan(overlap_n, overlap_ntots);
            bellsim::OrderedJson scan = bellsim::OrderedJson::array();
            for (std::size_t i = 0; i < overlap_ntots.size(); ++i) {
                scan.push_back(bellsim::OrderedJson{{"n_tot", overlap_ntots[i]},
                                                    {"log_prob", log_probs[i]}});
            }
            bellsim::OrderedJson inputs{{"n", overlap_n}};
            bellsim::OrderedJson results{{"scan", scan}};
            emit(bellsim::make_report("loopholes overlap", inputs, results, std::nullopt),
                 format);
            return 0;
        }

        if (*threshold) {
            const bellsim::BscRate eps_star =
                bellsim::critical_epsilon(bellsim::ChshStatistic{threshold_s});
            bellsim::OrderedJson inputs{{"s_ideal", threshold_s}};
            bellsim::OrderedJson results{{"epsilon_star", eps_star.value()}};
            emit(bellsim::make_report("loopholes threshold", inputs, results, std::nullopt),
                 format);
            return 0;
        }

        throw bellsim::validation_error("no command given");
    } catch (const bellsim::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
