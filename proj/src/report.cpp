#include <cstdio>

#include "aviator/dataset.hpp"
#include "aviator/errors.hpp"

namespace aviator {

namespace {

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void add_row(std::string& out, const std::string& key, const std::string& value) {
    out += key;
    if (key.size() < 24) out += std::string(24 - key.size(), ' ');
    out += value;
    out += "\n";
}

}  // namespace

std::string render_summary_table(const Json& summary) {
    if (!summary.contains("schema_version") || summary["schema_version"].get<int>() != 1) {
        throw DomainError("unsupported summary schema");
    }
    std::string out;
    add_row(out, "metric", "value");
    add_row(out, "------", "-----");
    add_row(out, "samples", std::to_string(summary.at("samples").get<int>()));
    add_row(out, "runs", std::to_string(summary.at("runs").get<int>()));
    add_row(out, "records", std::to_string(summary.at("records").get<int>()));
    if (summary.at("empty_corpus").get<bool>()) {
        add_row(out, "empty_corpus", "true (no samples with a cwe target)");
        return out;
    }
    const Json& rates = summary.at("per_run_success");
    for (std::size_t i = 0; i < rates.size(); ++i) {
        add_row(out, "run_" + std::to_string(i) + "_success", fixed6(rates[i].get<double>()));
    }
    add_row(out, "aisr_mean", fixed6(summary.at("aisr").at("mean").get<double>()));
    add_row(out, "aisr_std", fixed6(summary.at("aisr").at("std").get<double>()));
    for (const auto& [k, v] : summary.at("pass_at_k").items()) {
        add_row(out, "pass@" + k, fixed6(v.get<double>()));
    }
    return out;
}

}  // namespace aviator
