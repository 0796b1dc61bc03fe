#include "blunderfit/report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace blunderfit {

namespace {

using nlohmann::ordered_json;

std::string format_double(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("report values must be finite");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.11e", v);
    return buf;
}

void write_indent(std::string& out, int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
}

void write_value(const ordered_json& v, std::string& out, int depth) {
    using value_t = nlohmann::detail::value_t;
    switch (v.type()) {
        case value_t::null:
            out += "null";
            break;
        case value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case value_t::number_integer:
            out += std::to_string(v.get<std::int64_t>());
            break;
        case value_t::number_unsigned:
            out += std::to_string(v.get<std::uint64_t>());
            break;
        case value_t::number_float:
            out += format_double(v.get<double>());
            break;
        case value_t::string:
            out += v.dump();  // dump of a string node = quoted + escaped
            break;
        case value_t::array: {
            if (v.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += ",\n";
                first = false;
                write_indent(out, depth + 1);
                write_value(item, out, depth + 1);
            }
            out += '\n';
            write_indent(out, depth);
            out += ']';
            break;
        }
        case value_t::object: {
            if (v.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                write_indent(out, depth + 1);
                out += ordered_json(it.key()).dump();
                out += ": ";
                write_value(it.value(), out, depth + 1);
            }
            out += '\n';
            write_indent(out, depth);
            out += '}';
            break;
        }
        default:
            throw std::invalid_argument("unsupported JSON value type in report");
    }
}

ordered_json excluded_list(const std::vector<ExcludedEquation>& items) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : items) {
        ordered_json entry;
        entry["id"] = e.id;
        entry["normalized_residual"] = e.normalized_residual;
        arr.push_back(std::move(entry));
    }
    return arr;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

ordered_json optional_int(const std::optional<std::int64_t>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json to_json(const RunReport& report) {
    ordered_json j;

    ordered_json input;
    input["path"] = report.input.path;
    input["n"] = report.input.n;
    input["p"] = report.input.p;
    j["input"] = std::move(input);

    ordered_json config;
    config["gamma"] = report.config.gamma.value();
    config["l_prime"] = report.config.l_prime;
    config["kgamma"] = to_string(report.config.kgamma_mode);
    config["sigma_rescale"] = to_string(report.config.sigma_mode);
    config["baseline_k"] =
        report.config.baseline_k ? ordered_json(*report.config.baseline_k) : ordered_json(nullptr);
    config["min_retained"] = optional_int(report.config.min_retained);
    config["max_iterations"] = optional_int(report.config.max_iterations);
    j["config"] = std::move(config);

    ordered_json iterations = ordered_json::array();
    for (const auto& rec : report.outcome.trace) {
        ordered_json it;
        it["n_in"] = rec.n_in;
        it["kappa"] = rec.kappa;
        it["L"] = rec.l_count;
        it["k_gamma"] = rec.k_gamma;
        it["excluded_step3"] = excluded_list(rec.excluded_step3);
        // baseline-rule exclusions are single-threshold, reported as step 4
        ordered_json step4 = excluded_list(rec.excluded_step4);
        for (auto& entry : excluded_list(rec.excluded_baseline)) step4.push_back(std::move(entry));
        it["excluded_step4"] = std::move(step4);
        it["parameters_after"] = vector_json(rec.parameters_after);
        iterations.push_back(std::move(it));
    }
    j["iterations"] = std::move(iterations);

    ordered_json fin;
    fin["parameters"] = vector_json(report.outcome.final_solution.parameters);
    ordered_json covariance = ordered_json::array();
    const auto& cov = report.outcome.final_solution.covariance;
    for (Eigen::Index r = 0; r < cov.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < cov.cols(); ++c) row.push_back(cov(r, c));
        covariance.push_back(std::move(row));
    }
    fin["covariance"] = std::move(covariance);
    fin["retained_ids"] = report.outcome.retained_ids;
    ordered_json excluded = ordered_json::array();
    for (const auto& e : report.outcome.excluded) {
        ordered_json entry;
        entry["id"] = e.id;
        entry["iteration"] = e.iteration;
        entry["reason"] = to_string(e.reason);
        entry["normalized_residual"] = e.normalized_residual;
        excluded.push_back(std::move(entry));
    }
    fin["excluded"] = std::move(excluded);
    fin["stop_reason"] = to_string(report.outcome.stop_reason);
    j["final"] = std::move(fin);

    j["timing_ms"] = report.timing_ms;
    return j;
}

nlohmann::ordered_json to_json(const SimulationReport& report) {
    ordered_json j;
    j["kind"] = report.kind;
    j["n"] = report.n;
    j["trials"] = report.trials;
    j["seed"] = report.seed;
    if (report.blunder_count) j["blunder_count"] = *report.blunder_count;
    if (report.blunder_magnitude) j["blunder_magnitude"] = *report.blunder_magnitude;

    if (report.null_stats) {
        const auto& s = *report.null_stats;
        ordered_json stats;
        stats["mean_L"] = s.mean_l;
        stats["var_L"] = s.var_l;
        stats["se_mean_L"] = s.se_mean_l;
        stats["p_ge2"] = s.p_ge2;
        stats["se_p_ge2"] = s.se_p_ge2;
        stats["p_ge3"] = s.p_ge3;
        stats["se_p_ge3"] = s.se_p_ge3;
        stats["p_ge4"] = s.p_ge4;
        stats["se_p_ge4"] = s.se_p_ge4;
        j["null"] = std::move(stats);
    }
    if (report.fixed_k) {
        ordered_json fixed;
        fixed["k"] = *report.fixed_k;
        fixed["mean_exceedances"] = report.fixed_k_mean_exceedances.value_or(0.0);
        fixed["se_mean"] = report.fixed_k_se.value_or(0.0);
        j["fixed_k"] = std::move(fixed);
    }
    if (!report.rules.empty()) {
        ordered_json rules = ordered_json::array();
        for (const auto& rule : report.rules) {
            ordered_json r;
            r["name"] = rule.name;
            r["bias"] = rule.bias;
            r["rmse"] = rule.rmse;
            r["mean_excluded"] = rule.mean_excluded;
            r["mean_excluded_first_pass"] = rule.mean_excluded_first_pass;
            r["se_excluded_first_pass"] = rule.se_excluded_first_pass;
            r["false_exclusion_rate"] = rule.false_exclusion_rate
                                            ? ordered_json(*rule.false_exclusion_rate)
                                            : ordered_json(nullptr);
            r["missed_blunder_rate"] = rule.missed_blunder_rate
                                           ? ordered_json(*rule.missed_blunder_rate)
                                           : ordered_json(nullptr);
            rules.push_back(std::move(r));
        }
        j["rules"] = std::move(rules);
    }
    return j;
}

std::string canonical_json(const nlohmann::ordered_json& value) {
    std::string out;
    write_value(value, out, 0);
    out += '\n';
    return out;
}

std::string reserialize_json(const std::string& text) {
    return canonical_json(ordered_json::parse(text));
}

}  // namespace blunderfit
