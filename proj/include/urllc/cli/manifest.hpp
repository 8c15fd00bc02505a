#pragma once

// Run manifests: what was run, with which inputs and conventions, and the
// hashes of what came out. Hashes are git blob ids (SHA-1 over
// "blob <size>\0" + content), so `git hash-object` reproduces them.

#include <openssl/evp.h>

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "urllc/cli/config.hpp"
#include "urllc/version.hpp"

namespace urllc::cli {

inline std::string sha1_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("SHA-1 digest failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

inline std::string git_blob_id(const std::string& content) {
    std::string blob = "blob " + std::to_string(content.size());
    blob.push_back('\0');
    blob += content;
    return sha1_hex(blob);
}

inline nlohmann::ordered_json conventions_json(const Conventions& c) {
    return {{"mu_log", to_string(c.mu_log)},
            {"gamma_y", to_string(c.gamma_y)},
            {"mrc_n", to_string(c.mrc_n)},
            {"power", to_string(c.power)},
            {"link_model", to_string(c.link_model)},
            {"latency_counts_pilots", c.latency_counts_pilots}};
}

inline nlohmann::ordered_json snapshot_json(const RunConfig& cfg) {
    using nlohmann::ordered_json;
    const auto& sc = cfg.scenario;
    ordered_json scenario = {{"snr_db", sc.power.db()},
                             {"eta", sc.eta},
                             {"beta", sc.beta},
                             {"alpha", sc.alpha},
                             {"rate", sc.rate},
                             {"n_source", sc.n_source},
                             {"n_relay", sc.n_relay},
                             {"symbol_period", sc.symbol_period}};
    scenario["pilots"] = sc.pilots ? ordered_json(*sc.pilots) : ordered_json(nullptr);

    ordered_json policy = {{"kind", to_string(sc.policy.kind)}, {"kappa", sc.policy.kappa}};

    ordered_json schemes = ordered_json::array();
    for (auto s : cfg.sweep.schemes) schemes.push_back(to_string(s));
    ordered_json policies = ordered_json::array();
    for (auto p : cfg.sweep.policies) policies.push_back(to_string(p));
    ordered_json sweep = {{"snr_db", cfg.sweep.snr_db},
                          {"schemes", schemes},
                          {"policies", policies},
                          {"kappas", cfg.sweep.kappas},
                          {"n", cfg.sweep.n}};

    const auto& op = cfg.optimizer;
    ordered_json optimizer = {{"scheme", to_string(op.space.scheme)},
                              {"n_min", op.space.n.min},
                              {"n_max", op.space.n.max},
                              {"relay_fraction", op.space.relay_fraction},
                              {"eps_grid", op.eps_grid}};

    const auto& sm = cfg.simulate;
    ordered_json simulate = {{"mode", to_string(sm.mode)},
                             {"samples", sm.samples},
                             {"seed", sm.seed},
                             {"importance", to_string(sm.importance)},
                             {"pilot_energy", sm.pilot_energies}};

    return {{"scenario", scenario},
            {"policy", policy},
            {"conventions", conventions_json(sc.conventions)},
            {"sweep", sweep},
            {"optimizer", optimizer},
            {"simulate", simulate}};
}

struct OutputFile {
    std::string name;  // relative to the output directory
    std::string content;
};

/// Manifest for one run. Worker counts are left out: they never change
/// results.
inline nlohmann::ordered_json make_manifest(const std::vector<std::string>& argv, const std::string& subcommand,
                                            const std::string& config_text, const RunConfig& cfg,
                                            const std::vector<OutputFile>& outputs) {
    using nlohmann::ordered_json;
    ordered_json files = ordered_json::array();
    for (const auto& f : outputs) files.push_back({{"path", f.name}, {"blob", git_blob_id(f.content)}});
    return {{"tool", "urllc"},
            {"version", kVersion},
            {"subcommand", subcommand},
            {"command_line", argv},
            {"input_blob", config_text.empty() ? ordered_json(nullptr) : ordered_json(git_blob_id(config_text))},
            {"conventions", conventions_json(cfg.scenario.conventions)},
            {"config", snapshot_json(cfg)},
            {"outputs", files}};
}

}  // namespace urllc::cli
