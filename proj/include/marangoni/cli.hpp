#pragma once

#include "marangoni/coefficients.hpp"
#include "marangoni/diagnostics.hpp"
#include "marangoni/dynamics.hpp"
#include "marangoni/fields.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace marangoni {

/// "name" or "name(a,b,...)" or "file:<path>".
struct Preset {
    std::string name;
    std::vector<double> args;
    std::string path;  // for file:

    static Preset parse(const std::string& text);
    std::string to_string() const;
};

struct RunConfig {
    int nx = 32, ny = 32;
    double lx = 1.0, ly = 1.0;
    PhysicalParams params;
    StepConfig step;
    double t_end = 1.0;
    long snapshot_every = 100;
    long diagnostics_every = 1;
    std::string output_dir = "out";

    Preset ic_phi{"bubble", {}, {}};
    Preset phi_b{"constant", {1.0}, {}};
    Preset ic_theta{"zero", {}, {}};
    Preset ic_u{"zero", {}, {}};

    double omega = 1.0;
    double eta = 1.0;
    std::uint64_t seed = 0;
    std::optional<double> c1, c2, c3, cP;
    int constant_samples = 200;
    int decay_window = 0;  // 0: a tenth of the rows

    std::string restart_dir;
    long restart_step = -1;

    Grid grid() const { return Grid(nx, ny, lx, ly); }
    long total_steps() const;
};

/// Flat key = value text; '#' starts a comment. Unknown keys and bad values
/// throw ConfigError naming the key and the line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Normalized form; parse_config(serialize(c)) serializes identically.
std::string serialize(const RunConfig& c);

BoundaryData make_phase_boundary(const RunConfig& c);
/// Sobolev constants with the config overrides applied.
SobolevConstants resolve_constants(const RunConfig& c);

/// Initial state from the presets. theta2 scales the gaussian_theta2 preset.
SimState make_initial_state(const RunConfig& c, double theta2);

enum ExitCode : int {
    exit_success = 0,
    exit_config = 1,
    exit_invariant = 2,
    exit_solver = 3,
    exit_io = 4,
};

/// Runs to t_end, writing diagnostics.csv, summary.txt, config.txt and
/// snapshots into c.output_dir. Progress and errors go to `log`.
int run(const RunConfig& c, std::ostream& log);

/// key = value lines of summary.txt.
std::map<std::string, std::string> read_key_values(const std::string& path);

enum class CheckStatus { pass, fail, skip };

struct AuditCheck {
    std::string name;
    CheckStatus status = CheckStatus::pass;
    std::string detail;
};

struct AuditReport {
    std::vector<AuditCheck> checks;
    std::vector<long> flagged_steps;  // rows that failed a per-row check
    bool ok() const;
};

/// Re-verifies a finished run directory. Throws FormatError / std::runtime_error
/// for unreadable inputs.
AuditReport audit(const std::string& run_dir);
void print_audit(std::ostream& os, const AuditReport& report);

/// Evaluates thresholds for the config and prints them as key = value.
void print_thresholds(std::ostream& os, const RunConfig& c);

}  // namespace marangoni
