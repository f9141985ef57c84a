#include "shellflow/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace shellflow {
namespace {

using nlohmann::json;

std::string ou_start_name(OUStart s) {
    switch (s) {
    case OUStart::zero:
        return "zero";
    case OUStart::stationary:
        return "stationary";
    case OUStart::pathwise:
        return "pathwise";
    }
    return "zero";
}

OUStart ou_start_value(const std::string& s) {
    if (s == "zero") return OUStart::zero;
    if (s == "stationary") return OUStart::stationary;
    if (s == "pathwise") return OUStart::pathwise;
    throw std::invalid_argument("manifest: unknown z_start '" + s + "'");
}

bool same_model(const ModelConfig& a, const ModelConfig& b) {
    return a.nu == b.nu && a.k0 == b.k0 && a.n_shells == b.n_shells && a.model == b.model && a.delta == b.delta &&
           a.lambda == b.lambda && a.sigma == b.sigma && a.alpha == b.alpha && a.epsilon == b.epsilon;
}

bool same_solver(const SolverSettings& a, const SolverSettings& b) {
    return a.dt == b.dt && a.t0 == b.t0 && a.t1 == b.t1 && a.store_every == b.store_every &&
           a.scheme == b.scheme && a.z_start == b.z_start && a.suppress_nonlinearity == b.suppress_nonlinearity;
}

}  // namespace

bool operator==(const RunManifest& a, const RunManifest& b) {
    return a.schema_version == b.schema_version && a.subcommand == b.subcommand && same_model(a.model, b.model) &&
           same_solver(a.solver, b.solver) && a.seed == b.seed && a.parameters == b.parameters &&
           a.tool_version == b.tool_version && a.timestamp == b.timestamp &&
           a.brownian_convention == b.brownian_convention && a.outputs == b.outputs;
}

json to_json(const RunManifest& m) {
    json sigma = json::array();
    for (const auto& s : m.model.sigma) sigma.push_back({s.real(), s.imag()});
    json outputs = json::array();
    for (const auto& o : m.outputs) outputs.push_back({{"path", o.path}, {"sha256", o.sha256}});
    return {
        {"schema_version", m.schema_version},
        {"subcommand", m.subcommand},
        {"model",
         {{"nu", m.model.nu},
          {"k0", m.model.k0},
          {"n_shells", m.model.n_shells},
          {"model", to_string(m.model.model)},
          {"delta", m.model.delta},
          {"lambda", m.model.lambda},
          {"sigma", sigma},
          {"alpha", m.model.alpha},
          {"epsilon", m.model.epsilon}}},
        {"solver",
         {{"dt", m.solver.dt},
          {"t0", m.solver.t0},
          {"t1", m.solver.t1},
          {"store_every", m.solver.store_every},
          {"scheme", to_string(m.solver.scheme)},
          {"z_start", ou_start_name(m.solver.z_start)},
          {"suppress_nonlinearity", m.solver.suppress_nonlinearity}}},
        {"seed", m.seed},
        {"parameters", m.parameters},
        {"tool_version", m.tool_version},
        {"timestamp", m.timestamp},
        {"brownian_convention", m.brownian_convention},
        {"outputs", outputs},
    };
}

RunManifest manifest_from_json(const json& j) {
    try {
        RunManifest m;
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != manifest_schema_version)
            throw std::invalid_argument("manifest: unsupported schema version " + std::to_string(m.schema_version));
        m.subcommand = j.at("subcommand").get<std::string>();
        const json& model = j.at("model");
        m.model.nu = model.at("nu").get<double>();
        m.model.k0 = model.at("k0").get<double>();
        m.model.n_shells = model.at("n_shells").get<std::size_t>();
        m.model.model = model_kind_from_string(model.at("model").get<std::string>());
        m.model.delta = model.at("delta").get<double>();
        m.model.lambda = model.at("lambda").get<double>();
        m.model.sigma.clear();
        for (const auto& s : model.at("sigma")) m.model.sigma.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
        m.model.alpha = model.at("alpha").get<double>();
        m.model.epsilon = model.at("epsilon").get<double>();
        const json& solver = j.at("solver");
        m.solver.dt = solver.at("dt").get<double>();
        m.solver.t0 = solver.at("t0").get<double>();
        m.solver.t1 = solver.at("t1").get<double>();
        m.solver.store_every = solver.at("store_every").get<std::size_t>();
        m.solver.scheme = scheme_from_string(solver.at("scheme").get<std::string>());
        m.solver.z_start = ou_start_value(solver.at("z_start").get<std::string>());
        m.solver.suppress_nonlinearity = solver.at("suppress_nonlinearity").get<bool>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.parameters = j.at("parameters");
        m.tool_version = j.at("tool_version").get<std::string>();
        m.timestamp = j.at("timestamp").get<std::string>();
        m.brownian_convention = j.at("brownian_convention").get<std::string>();
        for (const auto& o : j.at("outputs"))
            m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
        return m;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("manifest: ") + e.what());
    }
}

std::string emit_manifest(const RunManifest& m) { return to_json(m).dump(2) + "\n"; }

RunManifest parse_manifest(const std::string& text) {
    try {
        return manifest_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("manifest: ") + e.what());
    }
}

std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "' for hashing");
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace shellflow
