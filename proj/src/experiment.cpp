#include "blowuplab/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace blowuplab {

using nlohmann::json;

QuadTol ExperimentConfig::quad_tol() const {
    QuadTol t;
    t.rel = tol_rel;
    t.abs = tol_abs;
    t.max_evals = max_evals;
    return t;
}

DomainSpec domain_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("domain: expected an object with a \"kind\" tag");
    const std::string kind = j.at("kind").get<std::string>();
    DomainSpec d = DomainSpec::ball();
    if (kind == "ball") {
        d = DomainSpec::ball(j.value("radius", 1.0));
    } else if (kind == "ellipsoid") {
        const auto a = j.at("semi_axes").get<std::vector<double>>();
        if (a.size() != 4)
            throw std::invalid_argument("ellipsoid: semi_axes must have 4 entries");
        d = DomainSpec::ellipsoid({a[0], a[1], a[2], a[3]});
    } else if (kind == "protrusion") {
        const auto ax = j.at("axis").get<std::vector<double>>();
        if (ax.size() != 4) throw std::invalid_argument("protrusion: axis must have 4 entries");
        d = DomainSpec::protrusion(j.at("base").get<double>(),
                                   j.at("amplitude").get<double>(),
                                   j.at("frequency").get<int>(),
                                   {ax[0], ax[1], ax[2], ax[3]});
    } else {
        throw std::invalid_argument("domain: unknown kind \"" + kind + "\"");
    }
    if (j.contains("rotation")) {
        const auto r = j.at("rotation").get<std::vector<double>>();
        if (r.size() != 16)
            throw std::invalid_argument("rotation: expected 16 row-major entries");
        Mat4 rot;
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) rot(i, k) = r[4 * i + k];
        d = d.rotated(rot);
    }
    return d;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    ExperimentConfig c;
    c.domain = domain_from_json(j.at("domain"));
    if (j.contains("lambda_grid")) {
        c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
        if (c.lambda_grid.empty()) throw std::invalid_argument("lambda_grid: must be nonempty");
        for (double l : c.lambda_grid)
            if (!(l > M_E)) throw std::invalid_argument("lambda_grid: entries must exceed e");
    } else {
        c.lambda_grid = {1e2, 316.22776601683793, 1e3, 3162.2776601683795, 1e4};
    }
    c.beta = j.value("beta", 1.0);
    if (j.contains("d_defaults")) {
        const auto d = j.at("d_defaults").get<std::vector<double>>();
        if (d.size() != 2) throw std::invalid_argument("d_defaults: expected 2 entries");
        c.d_defaults = {d[0], d[1]};
    }
    c.eta = j.value("eta", 0.2);
    c.tol_rel = j.value("tol_rel", 1e-4);
    c.tol_abs = j.value("tol_abs", 0.0);
    if (!(c.tol_rel > 0.0) || c.tol_abs < 0.0)
        throw std::invalid_argument("tolerances must be positive");
    if (j.contains("xi_directions")) {
        for (const auto& e : j.at("xi_directions")) {
            const auto v = e.get<std::vector<double>>();
            if (v.size() != 4)
                throw std::invalid_argument("xi_directions: entries must have 4 components");
            c.xi_directions.push_back(Vec4(v[0], v[1], v[2], v[3]).normalized());
        }
    }
    if (j.contains("constants")) {
        const auto& k = j.at("constants");
        c.constants = ExpansionConstants{k.value("c0", 0.0), k.at("c1").get<double>(),
                                         k.at("c2").get<double>()};
    }
    c.out_dir = j.value("out", std::string{});
    c.seed = j.value("seed", 0L);
    c.threads = j.value("threads", 0);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : cols_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<double>& values) {
    if (values.size() != cols_.size())
        throw std::logic_error("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) body_ += ',';
        body_ += format_double(values[i]);
    }
    body_ += "\r\n";
}

std::string CsvWriter::str() const {
    std::string out;
    for (std::size_t i = 0; i < cols_.size(); ++i) {
        if (i) out += ',';
        out += cols_[i];
    }
    out += "\r\n";
    out += body_;
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

namespace {

json vec_json(const Vec4& v) { return json::array({v[0], v[1], v[2], v[3]}); }

json xi_spherical(const Vec4& xi) {
    const Vec4 w = xi.normalized();
    const double chi = std::acos(std::clamp(w[0], -1.0, 1.0));
    const double sc = std::sin(chi);
    double theta = 0.0, phi = 0.0;
    if (sc > 1e-12) {
        theta = std::acos(std::clamp(w[1] / sc, -1.0, 1.0));
        const double st = std::sin(theta);
        if (st * sc > 1e-12) phi = std::atan2(w[3], w[2]);
    }
    return json{{"r", xi.norm()}, {"chi", chi}, {"theta", theta}, {"phi", phi}};
}

}  // namespace

json energy_sample_record(const ConcentrationConfig& cfg, const EnergyBreakdown& breakdown,
                          const ErrorNormReport* err, const QDecomposition* qdec) {
    json rec{{"lambda", cfg.lambda},
             {"beta", cfg.beta},
             {"d", {cfg.d[0], cfg.d[1]}},
             {"delta", {cfg.delta[0], cfg.delta[1]}},
             {"xi", {vec_json(cfg.xi[0].xi), vec_json(cfg.xi[1].xi)}},
             {"xi_spherical", {xi_spherical(cfg.xi[0].xi), xi_spherical(cfg.xi[1].xi)}},
             {"H_values",
              {(2.0 / 3.0) * cfg.xi[0].graph_g.sum(), (2.0 / 3.0) * cfg.xi[1].graph_g.sum()}},
             {"breakdown",
              {{"dirichlet", breakdown.dirichlet},
               {"mass", breakdown.mass},
               {"quartic", breakdown.quartic},
               {"coupling", breakdown.coupling},
               {"total", breakdown.total},
               {"converged", breakdown.converged}}}};
    if (err) {
        rec["error_report"] = {{"e", err->e},          {"s", err->s},
                               {"e6_regions", err->e6_regions},
                               {"total_bound", err->total_bound},
                               {"converged", err->converged}};
    }
    if (qdec) {
        rec["q_decomposition"] = {{"q", qdec->q},
                                  {"q1", qdec->q1},
                                  {"q2", qdec->q2},
                                  {"q3", qdec->q3},
                                  {"m1", qdec->m1},
                                  {"m2", qdec->m2},
                                  {"m3", qdec->m3},
                                  {"ratio_q1", qdec->ratio_q1},
                                  {"ratio_q2", qdec->ratio_q2},
                                  {"ratio_q3", qdec->ratio_q3},
                                  {"converged", qdec->converged}};
    }
    return rec;
}

json to_json(const ScalingFit& fit) {
    json grid = json::array();
    for (const auto& [l, v] : fit.grid) grid.push_back({{"lambda", l}, {"value", v}});
    const char* model = fit.model == ScalingModel::Tag::pure_power      ? "pure-power"
                        : fit.model == ScalingModel::Tag::power_with_log ? "power-with-log"
                                                                         : "affine-in-basis";
    return json{{"model", model},
                {"coefficients", fit.coefficients},
                {"r_squared", fit.r_squared},
                {"residuals", fit.residuals},
                {"grid", grid},
                {"rank_deficient", fit.rank_deficient}};
}

json to_json(const ConstantsFit& fit) {
    json rows = json::array();
    for (const auto& r : fit.rows)
        rows.push_back(
            {{"lambda", r.lambda}, {"H", r.h}, {"delta", r.delta}, {"energy", r.energy}});
    return json{{"c0", fit.c0},
                {"c1", fit.c1},
                {"c2", fit.c2},
                {"diagnostics",
                 {{"r_squared", fit.r_squared},
                  {"residuals", fit.residuals},
                  {"c1_low", fit.c1_low},
                  {"c2_low", fit.c2_low},
                  {"c1_high", fit.c1_high},
                  {"c2_high", fit.c2_high},
                  {"sign_ok", fit.sign_ok},
                  {"fit_ok", fit.fit_ok},
                  {"rank_deficient", fit.rank_deficient}}},
                {"samples", rows}};
}

json to_json(const BlowupPrediction& p) {
    json out{{"xi_star", {vec_json(p.xi_star[0].xi), vec_json(p.xi_star[1].xi)}},
             {"d_star", {p.d_star[0], p.d_star[1]}},
             {"delta_star", {p.delta_star[0], p.delta_star[1]}},
             {"H_values", {p.h_values[0], p.h_values[1]}},
             {"maxima_count", p.maxima_count},
             {"pair_count", p.pair_count},
             {"cross_validated", p.cross_validated}};
    if (p.cross_validated) {
        out["d_direct"] = {p.d_direct[0], p.d_direct[1]};
        out["energy_at_min"] = p.energy_at_min;
        out["consistent"] = p.consistent;
    }
    return out;
}

}  // namespace blowuplab
