// Report assembly: JSON and CSV emission where every floating value is
// written with 17 significant digits so parsing it back is lossless.
#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "bellsim/chsh.hpp"
#include "bellsim/coin.hpp"
#include "bellsim/loopholes.hpp"
#include "bellsim/montecarlo.hpp"
#include "bellsim/noise.hpp"

namespace bellsim {

using OrderedJson = nlohmann::ordered_json;

inline constexpr std::string_view build_identifier = "bellsim 1.0.0";
inline constexpr std::string_view report_schema_version = "1";

inline std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                         std::chars_format::general, 17);
    return std::string(buf.data(), end);
}

namespace detail {

inline void escape_json_string(std::string& out, std::string_view s) {
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char hex[8];
                    std::snprintf(hex, sizeof hex, "\\u%04x", c);
                    out += hex;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

inline void dump_scalar(std::string& out, const OrderedJson& v) {
    switch (v.type()) {
        case nlohmann::detail::value_t::number_float:
            out += format_double(v.get<double>());
            break;
        case nlohmann::detail::value_t::number_unsigned:
            out += std::to_string(v.get<std::uint64_t>());
            break;
        case nlohmann::detail::value_t::number_integer:
            out += std::to_string(v.get<std::int64_t>());
            break;
        case nlohmann::detail::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case nlohmann::detail::value_t::string:
            escape_json_string(out, v.get_ref<const std::string&>());
            break;
        default:
            out += "null";
    }
}

inline void dump_json_to(std::string& out, const OrderedJson& v, int depth) {
    const auto pad = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
    if (v.is_object()) {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        std::size_t i = 0;
        for (const auto& [key, child] : v.items()) {
            pad(depth + 1);
            escape_json_string(out, key);
            out += ": ";
            dump_json_to(out, child, depth + 1);
            if (++i < v.size()) out += ",";
            out += "\n";
        }
        pad(depth);
        out += "}";
    } else if (v.is_array()) {
        if (v.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            pad(depth + 1);
            dump_json_to(out, v[i], depth + 1);
            if (i + 1 < v.size()) out += ",";
            out += "\n";
        }
        pad(depth);
        out += "]";
    } else {
        dump_scalar(out, v);
    }
}

inline void flatten_csv(std::string& out, const OrderedJson& v, const std::string& path) {
    if (v.is_object()) {
        for (const auto& [key, child] : v.items())
            flatten_csv(out, child, path.empty() ? key : path + "." + key);
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i)
            flatten_csv(out, v[i], path + "." + std::to_string(i));
    } else {
        out += path;
        out.push_back(',');
        if (v.is_string()) {
            const std::string& s = v.get_ref<const std::string&>();
            if (s.find_first_of(",\"\n") != std::string::npos) {
                out.push_back('"');
                for (char c : s) {
                    if (c == '"') out.push_back('"');
                    out.push_back(c);
                }
                out.push_back('"');
            } else {
                out += s;
            }
        } else if (!v.is_null()) {
            dump_scalar(out, v);
        }
        out.push_back('\n');
    }
}

}  // namespace detail

inline std::string dump_json(const OrderedJson& v) {
    std::string out;
    detail::dump_json_to(out, v, 0);
    out.push_back('\n');
    return out;
}

// One row per scalar leaf, keyed by its dotted path.
inline std::string dump_csv(const OrderedJson& v) {
    std::string out = "key,value\n";
    detail::flatten_csv(out, v, "");
    return out;
}

inline OrderedJson report_json(const JointDistribution& j) {
    return {{"pp", j.p_pp}, {"pm", j.p_pm}, {"mp", j.p_mp}, {"mm", j.p_mm}};
}

inline OrderedJson report_json(const CorrelationSet& c) {
    return {{"ab", c.e_ab}, {"ad", c.e_ad}, {"cb", c.e_cb}, {"cd", c.e_cd}};
}

inline OrderedJson report_json(const SettingsQuad& q) {
    return {{"a", q.a()}, {"b", q.b()}, {"c", q.c()}, {"d", q.d()}};
}

inline OrderedJson report_json(const NoiseQuad& n) {
    return {{"eps1", n.eps1.value()},
            {"eps2", n.eps2.value()},
            {"eps3", n.eps3.value()},
            {"eps4", n.eps4.value()}};
}

inline OrderedJson report_json(const ErasureRates& e) {
    return {{"delta_a", e.delta_a}, {"delta_b", e.delta_b}};
}

inline OrderedJson report_json(const DeltaQuad& d) {
    return {{"d1", d.d1}, {"d2", d.d2}, {"d3", d.d3}, {"d4", d.d4}};
}

inline OrderedJson report_json(const OutcomeTally& t) {
    OrderedJson out{{"n_pp", t.n_pp}, {"n_pm", t.n_pm}, {"n_mp", t.n_mp}, {"n_mm", t.n_mm}};
    if (t.total() > 0) {
        out["correlation"] = t.empirical_correlation();
        out["standard_error"] = t.correlation_standard_error();
    } else {
        out["correlation"] = nullptr;
        out["standard_error"] = nullptr;
    }
    return out;
}

inline OrderedJson report_json(const CounterTallies& t) {
    OrderedJson stages;
    for (SettingPair p : all_setting_pairs)
        stages[std::string(to_string(p))] = report_json(t.stage(p));
    OrderedJson out{{"trials", t.trials}, {"stages", stages}};
    out["s"] = t.empirical_s().value;
    out["s_standard_error"] = t.s_standard_error();
    return out;
}

inline OrderedJson report_json(const PairRunStats& s) {
    OrderedJson out{{"emitted", s.emitted}, {"detected", s.detected()}};
    out["counts"] = OrderedJson{{"n_pp", s.outcomes.n_pp},
                                {"n_pm", s.outcomes.n_pm},
                                {"n_mp", s.outcomes.n_mp},
                                {"n_mm", s.outcomes.n_mm}};
    if (s.detected() > 0) {
        out["correlation"] = s.empirical_correlation();
        out["standard_error"] = s.correlation_standard_error();
    } else {
        out["correlation"] = nullptr;
        out["standard_error"] = nullptr;
    }
    return out;
}

inline OrderedJson report_json(const RunStats& stats) {
    OrderedJson pairs;
    bool complete = true;
    for (SettingPair p : all_setting_pairs) {
        pairs[std::string(to_string(p))] = report_json(stats.pair(p));
        complete = complete && stats.pair(p).detected() > 0;
    }
    OrderedJson out{{"pairs", pairs}};
    if (complete) {
        out["s"] = stats.empirical_s().value;
        out["s_standard_error"] = stats.s_standard_error();
    } else {
        out["s"] = nullptr;
        out["s_standard_error"] = nullptr;
    }
    return out;
}

// Shard count is deliberately absent: results are shard-invariant and the
// serialized report must be too.
inline OrderedJson make_report(const std::string& command, OrderedJson inputs,
                               OrderedJson results, std::optional<std::uint64_t> seed) {
    OrderedJson report;
    report["schema_version"] = std::string(report_schema_version);
    report["command"] = command;
    report["inputs"] = std::move(inputs);
    report["results"] = std::move(results);
    OrderedJson provenance;
    if (seed) provenance["seed"] = *seed;
    provenance["build"] = std::string(build_identifier);
    report["provenance"] = provenance;
    return report;
}

}  // namespace bellsim
