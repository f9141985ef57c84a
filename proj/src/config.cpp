#include "shellflow/config.hpp"

#include "shellflow/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace shellflow {
namespace {

namespace pt = boost::property_tree;

std::size_t to_count(const std::string& key, const std::string& text) {
    const double x = parse_real(text);
    if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x)))
        throw std::invalid_argument(key + " must be a nonnegative integer");
    return static_cast<std::size_t>(x);
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw std::invalid_argument(key + " must be a boolean");
}

OUStart ou_start_from_string(const std::string& text) {
    if (text == "zero") return OUStart::zero;
    if (text == "stationary") return OUStart::stationary;
    if (text == "pathwise") return OUStart::pathwise;
    throw std::invalid_argument("z_start must be zero, stationary or pathwise");
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& f : split_csv(text))
        if (!f.empty()) out.push_back(parse_real(f));
    return out;
}

RunConfig default_run_config() {
    RunConfig rc;
    rc.model.n_shells = 16;
    rc.model.sigma.assign(16, Complex{});
    rc.model.sigma[0] = {0.5, 0.0};
    rc.model.sigma[1] = {0.0, 0.5};
    rc.model.sigma[2] = {0.25, 0.0};
    return rc;
}

RunConfig parse_run_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    RunConfig rc = default_run_config();
    std::vector<double> sigma_re;
    std::vector<double> sigma_im;
    bool sigma_given = false;

    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw std::invalid_argument("config: key '" + section + "' outside a section");
        for (const auto& [key, node] : body) {
            const std::string v = node.data();
            const std::string name = section + "." + key;
            try {
                if (section == "model") {
                    if (key == "nu") rc.model.nu = parse_real(v);
                    else if (key == "k0") rc.model.k0 = parse_real(v);
                    else if (key == "n_shells") rc.model.n_shells = to_count(name, v);
                    else if (key == "model") rc.model.model = model_kind_from_string(v);
                    else if (key == "delta") rc.model.delta = parse_real(v);
                    else if (key == "lambda") rc.model.lambda = parse_real(v);
                    else if (key == "epsilon") rc.model.epsilon = parse_real(v);
                    else if (key == "alpha") {
                        rc.alpha_auto = v == "auto";
                        if (!rc.alpha_auto) rc.model.alpha = parse_real(v);
                    } else if (key == "sigma_re") {
                        sigma_re = parse_real_list(v);
                        sigma_given = true;
                    } else if (key == "sigma_im") {
                        sigma_im = parse_real_list(v);
                        sigma_given = true;
                    } else throw std::invalid_argument("unknown key");
                } else if (section == "solver") {
                    if (key == "dt") rc.solver.dt = parse_real(v);
                    else if (key == "t0") rc.solver.t0 = parse_real(v);
                    else if (key == "t1") rc.solver.t1 = parse_real(v);
                    else if (key == "store_every") rc.solver.store_every = to_count(name, v);
                    else if (key == "scheme") rc.solver.scheme = scheme_from_string(v);
                    else if (key == "z_start") rc.solver.z_start = ou_start_from_string(v);
                    else if (key == "initial") {
                        if (v != "zero" && v != "ball") throw std::invalid_argument("must be zero or ball");
                        rc.initial = v;
                    } else if (key == "initial_radius") rc.initial_radius = parse_real(v);
                    else throw std::invalid_argument("unknown key");
                } else if (section == "attractor") {
                    auto& a = rc.attractor;
                    if (key == "members") a.members = to_count(name, v);
                    else if (key == "pullback_time") a.pullback_time = parse_real(v);
                    else if (key == "lambdas") a.lambdas = parse_real_list(v);
                    else if (key == "lambda0") a.lambda0 = parse_real(v);
                    else if (key == "initial_radius") a.initial_radius = parse_real(v);
                    else if (key == "t_horizon") a.t_horizon = parse_real(v);
                    else if (key == "t_erg") a.t_erg = parse_real(v);
                    else if (key == "n_modes") a.n_modes = to_count(name, v);
                    else if (key == "K1") a.K1 = parse_real(v);
                    else if (key == "K2") a.K2 = parse_real(v);
                    else if (key == "K3") a.K3 = parse_real(v);
                    else if (key == "cstar") a.cstar = parse_real(v);
                    else if (key == "c_vh") a.c_vh = parse_real(v);
                    else if (key == "constant_trials") a.constant_trials = to_count(name, v);
                    else if (key == "squeeze_pairs") a.squeeze_pairs = to_count(name, v);
                    else if (key == "squeeze_time") a.squeeze_time = parse_real(v);
                    else if (key == "squeeze_pullback") a.squeeze_pullback = parse_real(v);
                    else throw std::invalid_argument("unknown key");
                } else if (section == "stats") {
                    if (key == "p_list") rc.stats.p_list = parse_real_list(v);
                    else if (key == "n_lo") rc.stats.n_lo = static_cast<int>(to_count(name, v));
                    else if (key == "n_hi") rc.stats.n_hi = static_cast<int>(to_count(name, v));
                    else throw std::invalid_argument("unknown key");
                } else if (section == "test") {
                    if (key == "tamper_sabra_conjugation") rc.tamper_sabra_conjugation = to_bool(name, v);
                    else throw std::invalid_argument("unknown key");
                } else {
                    throw std::invalid_argument("unknown section [" + section + "]");
                }
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("config: " + name + ": " + e.what());
            }
        }
    }

    if (sigma_given || rc.model.sigma.size() != rc.model.n_shells) {
        if (sigma_re.size() > rc.model.n_shells || sigma_im.size() > rc.model.n_shells)
            throw std::invalid_argument("config: sigma lists are longer than n_shells");
        std::vector<Complex> sigma(rc.model.n_shells);
        const auto& base = rc.model.sigma;
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            if (sigma_given) {
                const double re = i < sigma_re.size() ? sigma_re[i] : 0.0;
                const double im = i < sigma_im.size() ? sigma_im[i] : 0.0;
                sigma[i] = {re, im};
            } else if (i < base.size()) {
                sigma[i] = base[i];
            }
        }
        rc.model.sigma = std::move(sigma);
    }
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

}  // namespace shellflow
