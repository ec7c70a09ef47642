// Deterministic serialization of analysis reports: compact JSON with a
// fixed key order, a fixed-schema CSV row, and a plain aligned table.
// Exact valuations print as integers; lower-bound markers print as a
// greater-or-equal sign followed by the bound, in every format.

#pragma once

#include <json.hpp>

#include <string>

#include "eisrank/analysis.hpp"

namespace eisrank {

inline std::string pi_to_string(PiValuation v) {
    if (v.kind == PiValuation::Kind::exact) return std::to_string(v.amount);
    return "≥" + std::to_string(v.amount);
}

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json pi_to_json(PiValuation v) {
    if (v.kind == PiValuation::Kind::exact) return ordered_json(v.amount);
    return ordered_json(pi_to_string(v));
}

template <typename T>
ordered_json opt_to_json(const std::optional<T>& v) {
    if (!v.has_value()) return nullptr;
    return ordered_json(*v);
}

}  // namespace detail

inline std::string render_json(const AnalysisReport& rep) {
    using detail::opt_to_json;
    using detail::ordered_json;
    ordered_json j;
    j["N"] = rep.N;
    j["p"] = rep.p;
    j["s"] = rep.s;
    j["ord"] = rep.ord ? detail::pi_to_json(*rep.ord) : ordered_json(nullptr);
    ordered_json vals = ordered_json::array();
    for (const auto& [t, v] : rep.val_chi_theta) vals.push_back({t, detail::pi_to_json(v)});
    j["val_chi_theta"] = std::move(vals);
    j["r"] = opt_to_json(rep.r);
    j["regime"] = rep.regime ? ordered_json(regime_name(*rep.regime)) : ordered_json(nullptr);
    ordered_json crit;
    crit["merel_ok"] = opt_to_json(rep.merel_ok);
    crit["lecouturier_ok"] = opt_to_json(rep.lecouturier_ok);
    crit["prop51_ok"] = opt_to_json(rep.prop51_ok);
    j["criteria"] = std::move(crit);
    if (rep.rank_T && rep.new_eisenstein) {
        ordered_json counts;
        counts["rank_T"] = *rep.rank_T;
        counts["new_eisenstein"] = *rep.new_eisenstein;
        j["counts"] = std::move(counts);
    } else {
        j["counts"] = nullptr;
    }
    if (rep.theoremC) {
        ordered_json tc;
        tc["orbits"] = rep.theoremC->orbits;
        ordered_json orbits = ordered_json::array();
        for (const auto& orb : rep.theoremC->per_orbit) {
            ordered_json o;
            o["t"] = orb.t;
            o["field_degree"] = orb.field_degree;
            o["orbit_size"] = orb.orbit_size;
            orbits.push_back(std::move(o));
        }
        tc["per_orbit"] = std::move(orbits);
        j["theoremC"] = std::move(tc);
    } else {
        j["theoremC"] = nullptr;
    }
    if (rep.timings) {
        ordered_json tm;
        tm["ord_ms"] = rep.timings->ord_ms;
        tm["rank_ms"] = rep.timings->rank_ms;
        tm["total_ms"] = rep.timings->total_ms;
        j["timings"] = std::move(tm);
    } else {
        j["timings"] = nullptr;
    }
    if (rep.error) {
        ordered_json err;
        err["kind"] = rep.error->kind;
        err["message"] = rep.error->message;
        j["error"] = std::move(err);
    }
    return j.dump();
}

inline const std::string& csv_header() {
    static const std::string header =
        "N,p,s,ord,val_chi_theta_s,r,regime,merel_ok,lecouturier_ok,prop51_ok,"
        "rank_T,new_eisenstein";
    return header;
}

inline std::string render_csv(const AnalysisReport& rep) {
    const auto opt_bool = [](const std::optional<bool>& b) -> std::string {
        if (!b.has_value()) return "";
        return *b ? "true" : "false";
    };
    const auto opt_u64 = [](const std::optional<u64>& v) -> std::string {
        return v ? std::to_string(*v) : "";
    };
    std::string vcs;  // valuation at the distinguished character t = s
    if (!rep.val_chi_theta.empty()) vcs = pi_to_string(rep.val_chi_theta.back().second);
    std::string row;
    row += std::to_string(rep.N);
    row += ',' + std::to_string(rep.p);
    row += ',' + std::to_string(rep.s);
    row += ',' + (rep.ord ? pi_to_string(*rep.ord) : std::string());
    row += ',' + vcs;
    row += ',' + opt_u64(rep.r);
    row += ',' + (rep.regime ? std::string(regime_name(*rep.regime)) : std::string());
    row += ',' + opt_bool(rep.merel_ok);
    row += ',' + opt_bool(rep.lecouturier_ok);
    row += ',' + opt_bool(rep.prop51_ok);
    row += ',' + opt_u64(rep.rank_T);
    row += ',' + opt_u64(rep.new_eisenstein);
    return row;
}

inline std::string render_table(const AnalysisReport& rep) {
    std::string out;
    const auto line = [&out](const std::string& key, const std::string& value) {
        out += key;
        for (size_t i = key.size(); i < 16; ++i) out += ' ';
        out += value;
        out += '\n';
    };
    const auto opt_bool = [](const std::optional<bool>& b) -> std::string {
        if (!b.has_value()) return "-";
        return *b ? "true" : "false";
    };
    const auto opt_u64 = [](const std::optional<u64>& v) -> std::string {
        return v ? std::to_string(*v) : "-";
    };
    line("N", std::to_string(rep.N));
    line("p", std::to_string(rep.p));
    line("s", std::to_string(rep.s));
    line("ord", rep.ord ? pi_to_string(*rep.ord) : "-");
    std::string vals;
    for (const auto& [t, v] : rep.val_chi_theta) {
        if (!vals.empty()) vals += "; ";
        vals += "t=" + std::to_string(t) + ": " + pi_to_string(v);
    }
    line("val_chi_theta", vals.empty() ? "-" : vals);
    line("r", opt_u64(rep.r));
    line("regime", rep.regime ? regime_name(*rep.regime) : "-");
    line("merel_ok", opt_bool(rep.merel_ok));
    line("lecouturier_ok", opt_bool(rep.lecouturier_ok));
    line("prop51_ok", opt_bool(rep.prop51_ok));
    line("rank_T", opt_u64(rep.rank_T));
    line("new_eisenstein", opt_u64(rep.new_eisenstein));
    if (rep.theoremC) {
        std::string tc = "orbits=" + std::to_string(rep.theoremC->orbits);
        for (const auto& orb : rep.theoremC->per_orbit)
            tc += "; t=" + std::to_string(orb.t) + ": degree " + std::to_string(orb.field_degree) +
                  ", size " + std::to_string(orb.orbit_size);
        line("theoremC", tc);
    }
    if (rep.timings) {
        line("ord_ms", std::to_string(rep.timings->ord_ms));
        line("rank_ms", std::to_string(rep.timings->rank_ms));
        line("total_ms", std::to_string(rep.timings->total_ms));
    }
    if (rep.error) line("error", rep.error->kind + ": " + rep.error->message);
    return out;
}

inline std::string render(const AnalysisReport& rep, const std::string& format) {
    if (format == "json") return render_json(rep);
    if (format == "csv") return render_csv(rep);
    if (format == "table") return render_table(rep);
    throw std::invalid_argument("render: unknown format '" + format + "' (expected json, csv, or table)");
}

}  // namespace eisrank
