#pragma once

#include "psdp/algorithms.hpp"
#include "psdp/core.hpp"
#include "psdp/errors.hpp"
#include "psdp/markovjump.hpp"
#include "psdp/models.hpp"
#include "psdp/rollout.hpp"
#include "psdp/stochastic.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace psdp::io {

using json = nlohmann::json;

inline constexpr int kProblemVersion = 1;

// ---------------------------------------------------------------------------
// JSON -> numeric payloads, with field-precise messages
// ---------------------------------------------------------------------------

namespace io_detail {

inline const json& member(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ValidationError(where.empty() ? key : where + "." + key, "missing required field");
    return j.at(key);
}

inline double number(const json& j, const std::string& field) {
    if (!j.is_number())
        throw ValidationError(field, "expected a number");
    return j.get<double>();
}

inline Vec to_vec(const json& j, const std::string& field) {
    if (!j.is_array())
        throw ValidationError(field, "expected an array of numbers");
    Vec v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
    return v;
}

inline Matrix to_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty())
        throw ValidationError(field, "expected a nonempty array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    Matrix m;
    for (std::size_t i = 0; i < rows; ++i) {
        const Vec row = to_vec(j[i], field + "[" + std::to_string(i) + "]");
        if (i == 0) {
            cols = row.size();
            if (cols == 0)
                throw ValidationError(field + "[0]", "rows must be nonempty");
            m = Matrix(rows, cols);
        } else if (row.size() != cols) {
            throw ValidationError(field + "[" + std::to_string(i) + "]",
                                  "row length differs from the first row; matrix must be rectangular");
        }
        for (std::size_t k = 0; k < cols; ++k)
            m(i, k) = row[k];
    }
    return m;
}

inline json from_vec(const Vec& v) { return json(v); }

inline json from_matrix(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json from_control(const ControlSpec& control) {
    json out;
    if (std::holds_alternative<std::monostate>(control)) {
        out["type"] = "none";
    } else if (const auto* choice = std::get_if<ComponentChoice>(&control)) {
        out["type"] = "component_choice";
        out["indices"] = choice->indices;
    } else if (const auto* gain = std::get_if<GainControl>(&control)) {
        out["type"] = "gain";
        out["L"] = from_matrix(gain->gain);
    }
    return out;
}

inline ControlSpec to_control(const json& j, const std::string& field) {
    const std::string type = member(j, "type", field).get<std::string>();
    if (type == "none")
        return std::monostate{};
    if (type == "component_choice") {
        ComponentChoice c;
        for (const auto& v : member(j, "indices", field))
            c.indices.push_back(v.get<std::size_t>());
        return c;
    }
    if (type == "gain")
        return GainControl{to_matrix(member(j, "L", field), field + ".L")};
    throw ValidationError(field + ".type", "unknown control type '" + type + "'");
}

} // namespace io_detail

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

using ProblemPayload = std::variant<BilinearModel, PositiveLinearModel, DistributionMDPModel,
                                    TabulatedModel, StochasticPositiveLinearModel, JumpProblem>;

struct LoadedProblem {
    std::string kind;
    ProblemPayload payload;
    SolverConfig config;
    std::optional<Engine> engine;
};

namespace io_detail {

inline BilinearModel parse_bilinear(const json& j) {
    const double alpha = number(member(j, "alpha", ""), "alpha");
    Matrix a = to_matrix(member(j, "A", ""), "A");
    Vec q = to_vec(member(j, "q", ""), "q");
    std::vector<BilinearGrid> grids;
    const json& comps = member(j, "components", "");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string base = "components[" + std::to_string(i) + "]";
        BilinearGrid grid;
        const json& controls = member(comps[i], "controls", base);
        for (std::size_t u = 0; u < controls.size(); ++u) {
            const std::string cbase = base + ".controls[" + std::to_string(u) + "]";
            grid.f.push_back(to_vec(member(controls[u], "f", cbase), cbase + ".f"));
            grid.g.push_back(number(member(controls[u], "g", cbase), cbase + ".g"));
        }
        grids.push_back(std::move(grid));
    }
    return BilinearModel(std::move(a), std::move(q), std::move(grids), alpha);
}

inline json bilinear_to_json(const BilinearModel& m) {
    json j;
    j["alpha"] = m.discount();
    j["A"] = from_matrix(m.A());
    j["q"] = from_vec(m.q());
    json comps = json::array();
    for (const auto& grid : m.components()) {
        json controls = json::array();
        for (std::size_t u = 0; u < grid.f.size(); ++u)
            controls.push_back({{"f", from_vec(grid.f[u])}, {"g", grid.g[u]}});
        comps.push_back({{"controls", std::move(controls)}});
    }
    j["components"] = std::move(comps);
    return j;
}

inline PositiveLinearModel parse_positive_linear(const json& j) {
    return PositiveLinearModel(to_matrix(member(j, "A", ""), "A"), to_matrix(member(j, "B", ""), "B"),
                               to_vec(member(j, "q", ""), "q"), to_vec(member(j, "r", ""), "r"),
                               to_matrix(member(j, "H", ""), "H"), number(member(j, "alpha", ""), "alpha"),
                               j.value("allow_unvalidated", false));
}

inline json positive_linear_to_json(const PositiveLinearModel& m) {
    return {{"alpha", m.discount()}, {"A", from_matrix(m.A())},   {"B", from_matrix(m.B())},
            {"q", from_vec(m.q())},  {"r", from_vec(m.r())},      {"H", from_matrix(m.H())}};
}

inline DistributionMDPModel parse_distribution_mdp(const json& j) {
    const double alpha = number(member(j, "alpha", ""), "alpha");
    std::vector<DistributionGrid> grids;
    const json& comps = member(j, "components", "");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string base = "components[" + std::to_string(i) + "]";
        DistributionGrid grid;
        const json& controls = member(comps[i], "controls", base);
        for (std::size_t u = 0; u < controls.size(); ++u) {
            const std::string cbase = base + ".controls[" + std::to_string(u) + "]";
            grid.p.push_back(to_vec(member(controls[u], "p", cbase), cbase + ".p"));
            grid.g.push_back(number(member(controls[u], "g", cbase), cbase + ".g"));
        }
        grids.push_back(std::move(grid));
    }
    return DistributionMDPModel(std::move(grids), alpha);
}

inline json distribution_mdp_to_json(const DistributionMDPModel& m) {
    json j;
    j["alpha"] = m.discount();
    json comps = json::array();
    for (const auto& grid : m.components()) {
        json controls = json::array();
        for (std::size_t u = 0; u < grid.p.size(); ++u)
            controls.push_back({{"p", from_vec(grid.p[u])}, {"g", grid.g[u]}});
        comps.push_back({{"controls", std::move(controls)}});
    }
    j["components"] = std::move(comps);
    return j;
}

inline TabulatedModel parse_tabulated(const json& j) {
    const double alpha = number(member(j, "alpha", ""), "alpha");
    std::vector<TabulatedPolicy> policies;
    const json& list = member(j, "policies", "");
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string base = "policies[" + std::to_string(k) + "]";
        policies.push_back({to_matrix(member(list[k], "A", base), base + ".A"),
                            to_vec(member(list[k], "q", base), base + ".q")});
    }
    return TabulatedModel(std::move(policies), alpha);
}

inline json tabulated_to_json(const TabulatedModel& m) {
    json j;
    j["alpha"] = m.discount();
    json list = json::array();
    for (const auto& pol : m.policies())
        list.push_back({{"A", from_matrix(pol.A)}, {"q", from_vec(pol.q)}});
    j["policies"] = std::move(list);
    return j;
}

inline StochasticPositiveLinearModel parse_stochastic(const json& j) {
    const double alpha = number(member(j, "alpha", ""), "alpha");
    Matrix h = to_matrix(member(j, "H", ""), "H");
    std::vector<ThetaComponent> thetas;
    const json& list = member(j, "theta", "");
    for (std::size_t t = 0; t < list.size(); ++t) {
        const std::string base = "theta[" + std::to_string(t) + "]";
        ThetaComponent th;
        th.label = list[t].value("label", "theta" + std::to_string(t));
        th.prob = number(member(list[t], "prob", base), base + ".prob");
        th.A = to_matrix(member(list[t], "A", base), base + ".A");
        th.B = to_matrix(member(list[t], "B", base), base + ".B");
        th.q = to_vec(member(list[t], "q", base), base + ".q");
        th.r = to_vec(member(list[t], "r", base), base + ".r");
        thetas.push_back(std::move(th));
    }
    return StochasticPositiveLinearModel(std::move(thetas), std::move(h), alpha);
}

inline json stochastic_to_json(const StochasticPositiveLinearModel& m) {
    json j;
    j["alpha"] = m.discount();
    j["H"] = from_matrix(m.H());
    json list = json::array();
    for (const auto& th : m.thetas())
        list.push_back({{"label", th.label},
                        {"prob", th.prob},
                        {"A", from_matrix(th.A)},
                        {"B", from_matrix(th.B)},
                        {"q", from_vec(th.q)},
                        {"r", from_vec(th.r)}});
    j["theta"] = std::move(list);
    return j;
}

inline JumpProblem parse_jump(const json& j, bool tabulated) {
    const double alpha = number(member(j, "alpha", ""), "alpha");
    Matrix p = to_matrix(member(j, "P", ""), "P");
    const json& modes = member(j, "modes", "");
    if (tabulated) {
        std::vector<JumpTabulatedMode> blocks;
        for (std::size_t theta = 0; theta < modes.size(); ++theta) {
            const std::string base = "modes[" + std::to_string(theta) + "]";
            JumpTabulatedMode block;
            const json& policies = member(modes[theta], "policies", base);
            for (std::size_t k = 0; k < policies.size(); ++k) {
                const std::string pbase = base + ".policies[" + std::to_string(k) + "]";
                ModePolicyData data;
                for (const auto& aw : member(policies[k], "A", pbase))
                    data.A.push_back(to_matrix(aw, pbase + ".A"));
                for (const auto& qw : member(policies[k], "q", pbase))
                    data.q.push_back(to_vec(qw, pbase + ".q"));
                block.policies.push_back(std::move(data));
            }
            blocks.push_back(std::move(block));
        }
        return JumpProblem(std::move(p), std::move(blocks), alpha);
    }
    std::vector<JumpLinearMode> blocks;
    for (std::size_t theta = 0; theta < modes.size(); ++theta) {
        const std::string base = "modes[" + std::to_string(theta) + "]";
        JumpLinearMode block;
        block.A = to_matrix(member(modes[theta], "A", base), base + ".A");
        block.B = to_matrix(member(modes[theta], "B", base), base + ".B");
        // q, r, H may be shared at the top level instead of repeated per mode.
        const auto pick = [&](const char* key) -> const json& {
            if (modes[theta].contains(key))
                return modes[theta].at(key);
            return member(j, key, "");
        };
        block.q = to_vec(pick("q"), base + ".q");
        block.r = to_vec(pick("r"), base + ".r");
        block.H = to_matrix(pick("H"), base + ".H");
        blocks.push_back(std::move(block));
    }
    return JumpProblem(std::move(p), std::move(blocks), alpha);
}

inline json jump_to_json(const JumpProblem& p) {
    json j;
    j["alpha"] = p.discount();
    j["P"] = from_matrix(p.P());
    json modes = json::array();
    if (p.is_tabulated()) {
        for (const auto& block : std::get<std::vector<JumpTabulatedMode>>(p.modes())) {
            json policies = json::array();
            for (const auto& pol : block.policies) {
                json aws = json::array();
                json qws = json::array();
                for (std::size_t w = 0; w < pol.A.size(); ++w) {
                    aws.push_back(from_matrix(pol.A[w]));
                    qws.push_back(from_vec(pol.q[w]));
                }
                policies.push_back({{"A", std::move(aws)}, {"q", std::move(qws)}});
            }
            modes.push_back({{"policies", std::move(policies)}});
        }
    } else {
        for (const auto& block : std::get<std::vector<JumpLinearMode>>(p.modes()))
            modes.push_back({{"A", from_matrix(block.A)},
                             {"B", from_matrix(block.B)},
                             {"q", from_vec(block.q)},
                             {"r", from_vec(block.r)},
                             {"H", from_matrix(block.H)}});
    }
    j["modes"] = std::move(modes);
    return j;
}

inline SolverConfig parse_solver_config(const json& j, SolverConfig config) {
    if (!j.contains("solver"))
        return config;
    const json& s = j.at("solver");
    if (s.contains("tolerance"))
        config.tolerance = number(s.at("tolerance"), "solver.tolerance");
    if (s.contains("max_iterations"))
        config.max_iterations = s.at("max_iterations").get<std::size_t>();
    if (s.contains("optimism_schedule")) {
        config.optimism_schedule.clear();
        for (const auto& v : s.at("optimism_schedule"))
            config.optimism_schedule.push_back(v.get<std::size_t>());
    }
    return config;
}

} // namespace io_detail

/// Parses a problem document; `base_config` supplies solver defaults that
/// the file's own solver section may override.
inline LoadedProblem parse_problem(const json& j, SolverConfig base_config = {}) {
    if (!j.is_object())
        throw ValidationError("", "problem document must be a JSON object");
    const int version = j.value("psdp_version", kProblemVersion);
    if (version != kProblemVersion)
        throw ValidationError("psdp_version",
                              "unsupported version " + std::to_string(version) + " (expected " +
                                  std::to_string(kProblemVersion) + ")");
    const std::string kind = io_detail::member(j, "kind", "").get<std::string>();

    auto finish = [&](ProblemPayload payload) {
        LoadedProblem p{kind, std::move(payload), io_detail::parse_solver_config(j, base_config),
                        std::nullopt};
        if (j.contains("solver") && j.at("solver").contains("engine"))
            p.engine = parse_engine(j.at("solver").at("engine").get<std::string>());
        return p;
    };

    if (kind == "bilinear")
        return finish(io_detail::parse_bilinear(j));
    if (kind == "positive_linear")
        return finish(io_detail::parse_positive_linear(j));
    if (kind == "distribution_mdp")
        return finish(io_detail::parse_distribution_mdp(j));
    if (kind == "tabulated")
        return finish(io_detail::parse_tabulated(j));
    if (kind == "stochastic_positive_linear")
        return finish(io_detail::parse_stochastic(j));
    if (kind == "jump_positive_linear")
        return finish(io_detail::parse_jump(j, false));
    if (kind == "jump_tabulated")
        return finish(io_detail::parse_jump(j, true));
    throw ValidationError("kind", "unknown problem kind '" + kind + "'");
}

inline LoadedProblem load_problem(const std::string& path, SolverConfig base_config = {}) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open problem file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("parse error in '" + path + "': " + e.what());
    }
    return parse_problem(j, std::move(base_config));
}

inline json problem_to_json(const LoadedProblem& p) {
    json j = std::visit(
        [](const auto& model) -> json {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, BilinearModel>)
                return io_detail::bilinear_to_json(model);
            else if constexpr (std::is_same_v<T, PositiveLinearModel>)
                return io_detail::positive_linear_to_json(model);
            else if constexpr (std::is_same_v<T, DistributionMDPModel>)
                return io_detail::distribution_mdp_to_json(model);
            else if constexpr (std::is_same_v<T, TabulatedModel>)
                return io_detail::tabulated_to_json(model);
            else if constexpr (std::is_same_v<T, StochasticPositiveLinearModel>)
                return io_detail::stochastic_to_json(model);
            else
                return io_detail::jump_to_json(model);
        },
        p.payload);
    j["psdp_version"] = kProblemVersion;
    j["kind"] = p.kind;
    return j;
}

inline void write_problem(const std::string& path, const LoadedProblem& p) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open '" + path + "' for writing");
    out << problem_to_json(p).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Result files (self-describing: the problem document is embedded so a
// rollout can run from the result file alone)
// ---------------------------------------------------------------------------

struct JumpModeResult {
    Vec c;
    ModePolicy policy;
};

struct ResultFile {
    std::string engine;
    bool converged = false;
    std::size_t iterations = 0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool stable = false;
    double spectral_radius = 0.0;
    Vec c_star;
    StructuredPolicy policy;
    std::vector<JumpModeResult> jump_modes;
    json problem;
};

inline json result_to_json(const SolveReport& report, const json& problem,
                           const std::vector<JumpModeResult>& jump_modes = {}) {
    json j;
    j["psdp_version"] = kProblemVersion;
    j["type"] = "result";
    j["engine"] = report.engine;
    j["converged"] = report.converged;
    j["iterations"] = report.iterations;
    j["residual"] = report.residual;
    j["tolerance"] = report.tolerance;
    j["stable"] = report.stable;
    j["spectral_radius"] = report.spectral_radius;
    j["c_star"] = io_detail::from_vec(report.c_star.values());
    j["policy"] = {{"A", io_detail::from_matrix(report.policy.A)},
                   {"q", io_detail::from_vec(report.policy.q)},
                   {"control", io_detail::from_control(report.policy.control)}};
    j["rng_algorithm"] = kRngAlgorithm;
    if (!jump_modes.empty()) {
        json modes = json::array();
        for (const auto& mode : jump_modes) {
            json aws = json::array();
            json qws = json::array();
            for (std::size_t w = 0; w < mode.policy.data.A.size(); ++w) {
                aws.push_back(io_detail::from_matrix(mode.policy.data.A[w]));
                qws.push_back(io_detail::from_vec(mode.policy.data.q[w]));
            }
            modes.push_back({{"c", io_detail::from_vec(mode.c)},
                             {"policy", {{"A", std::move(aws)},
                                         {"q", std::move(qws)},
                                         {"control", io_detail::from_control(mode.policy.control)}}}});
        }
        j["modes"] = std::move(modes);
    }
    j["problem"] = problem;
    return j;
}

inline void write_result(const std::string& path, const SolveReport& report, const json& problem,
                         const std::vector<JumpModeResult>& jump_modes = {}) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open '" + path + "' for writing");
    out << result_to_json(report, problem, jump_modes).dump(2) << "\n";
}

inline ResultFile load_result(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open result file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("parse error in '" + path + "': " + e.what());
    }
    if (j.value("type", "") != "result")
        throw ValidationError("type", "not a result file");

    ResultFile r;
    r.engine = j.value("engine", "");
    r.converged = j.value("converged", false);
    r.iterations = j.value("iterations", std::size_t{0});
    r.residual = j.value("residual", 0.0);
    r.tolerance = j.value("tolerance", 0.0);
    r.stable = j.value("stable", false);
    r.spectral_radius = j.value("spectral_radius", 0.0);
    r.c_star = io_detail::to_vec(io_detail::member(j, "c_star", ""), "c_star");
    const json& pol = io_detail::member(j, "policy", "");
    r.policy.A = io_detail::to_matrix(io_detail::member(pol, "A", "policy"), "policy.A");
    r.policy.q = io_detail::to_vec(io_detail::member(pol, "q", "policy"), "policy.q");
    r.policy.control = io_detail::to_control(io_detail::member(pol, "control", "policy"), "policy.control");
    if (j.contains("modes")) {
        for (const auto& mode : j.at("modes")) {
            JumpModeResult jm;
            jm.c = io_detail::to_vec(io_detail::member(mode, "c", "modes"), "modes.c");
            const json& mp = io_detail::member(mode, "policy", "modes");
            for (const auto& aw : io_detail::member(mp, "A", "modes.policy"))
                jm.policy.data.A.push_back(io_detail::to_matrix(aw, "modes.policy.A"));
            for (const auto& qw : io_detail::member(mp, "q", "modes.policy"))
                jm.policy.data.q.push_back(io_detail::to_vec(qw, "modes.policy.q"));
            jm.policy.control =
                io_detail::to_control(io_detail::member(mp, "control", "modes.policy"), "modes.policy.control");
            r.jump_modes.push_back(std::move(jm));
        }
    }
    r.problem = io_detail::member(j, "problem", "");
    return r;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

namespace io_detail {

inline std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace io_detail

/// Header: iter,residual,c_0,...,c_{n-1}. Values carry 17 significant
/// digits so reloading reproduces the doubles bit for bit.
inline void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open '" + path + "' for writing");
    const std::size_t n = trace.empty() ? 0 : trace.front().c.size();
    out << "iter,residual";
    for (std::size_t i = 0; i < n; ++i)
        out << ",c_" << i;
    out << "\n";
    for (const TracePoint& point : trace) {
        out << point.iteration << "," << io_detail::full_precision(point.residual);
        for (double v : point.c)
            out << "," << io_detail::full_precision(v);
        out << "\n";
    }
}

inline void write_rollout_csv(const std::string& path, const RolloutStats& stats) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open '" + path + "' for writing");
    out << "mean_cost,std_error,num_paths,horizon,seed,rng_algorithm\n";
    out << io_detail::full_precision(stats.mean_cost) << "," << io_detail::full_precision(stats.std_error)
        << "," << stats.num_paths << "," << stats.horizon << "," << stats.seed << ","
        << stats.rng_algorithm << "\n";
}

} // namespace psdp::io
