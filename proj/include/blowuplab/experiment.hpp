#pragma once

// Config-driven experiment plumbing: JSON configs, CSV/JSON emission with
// byte-reproducible formatting, and the per-sample record schema shared by
// the scaling commands.

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

#include "blowuplab/asymptotics.hpp"
#include "blowuplab/energy.hpp"

namespace blowuplab {

struct ExperimentConfig {
    DomainSpec domain = DomainSpec::ball();
    std::vector<double> lambda_grid;  // default 1e2 .. 1e4, half-decade steps
    double beta = 1.0;
    std::array<double, 2> d_defaults{1.0, 1.0};
    double eta = 0.2;
    double tol_rel = 1e-4;
    double tol_abs = 0.0;
    std::size_t max_evals = 400'000'000;
    std::vector<Vec4> xi_directions;
    std::optional<ExpansionConstants> constants;
    std::string out_dir;
    long seed = 0;  // synthetic-noise tests only
    int threads = 0;

    QuadTol quad_tol() const;
};

// Throws std::invalid_argument with a descriptive message on schema errors.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
DomainSpec domain_from_json(const nlohmann::json& j);

// Shortest round-trip decimal formatting (std::to_chars); the determinism
// contract for every emitted number.
std::string format_double(double v);

// RFC 4180: comma separators, CRLF line endings.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns);
    void add_row(const std::vector<double>& values);
    std::string str() const;

  private:
    std::vector<std::string> cols_;
    std::string body_;
};

void write_file(const std::string& path, const std::string& content);

nlohmann::json energy_sample_record(const ConcentrationConfig& cfg,
                                    const EnergyBreakdown& breakdown,
                                    const ErrorNormReport* err_report,
                                    const QDecomposition* qdec);

nlohmann::json to_json(const ScalingFit& fit);
nlohmann::json to_json(const ConstantsFit& fit);
nlohmann::json to_json(const BlowupPrediction& p);

}  // namespace blowuplab
