// Command-line driver: data generation, training, closed-loop simulation,
// gain/loss fields and SVG rendering.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppg/characteristics.hpp"
#include "ppg/closed_loop.hpp"
#include "ppg/errors.hpp"
#include "ppg/feedback.hpp"
#include "ppg/gain_loss.hpp"
#include "ppg/render.hpp"
#include "ppg/value_model.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kOutDirEnv = "PPG_OUT_DIR";

/// Runtime failure that names the missing input.
struct MissingArtifact : ppg::Error {
    using ppg::Error::Error;
};

std::string fnv1a_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ppg::IoError("cannot open " + path.string() + " for hashing");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
            h *= 0x100000001b3ULL;
        }
    }
    std::array<char, 17> hex{};
    std::snprintf(hex.data(), hex.size(), "%016llx", static_cast<unsigned long long>(h));
    return hex.data();
}

void write_json(const fs::path& path, const json& j) {
    ppg::write_text_file(path, j.dump(2) + "\n");
}

/// Options shared by every subcommand.
struct Common {
    std::string out_dir;
    ppg::GameParams params;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out_dir, "output directory (default: $PPG_OUT_DIR or ./out)");
    sub->add_option("--ve", c.params.evader_speed, "evader speed");
    sub->add_option("--vp", c.params.pursuer_speed, "pursuer speed");
    sub->add_option("--omega", c.params.evader_turn_rate, "evader maximal turn rate");
    sub->add_option("--rho", c.params.surveillance_radius, "surveillance radius");
}

fs::path prepare_out(Common& c) {
    if (c.out_dir.empty()) {
        const char* env = std::getenv(kOutDirEnv);
        c.out_dir = env != nullptr && *env != '\0' ? env : "out";
    }
    fs::create_directories(c.out_dir);
    return c.out_dir;
}

json params_json(const ppg::GameParams& p) {
    return {{"ve", p.evader_speed}, {"vp", p.pursuer_speed}, {"omega", p.evader_turn_rate},
            {"rho", p.surveillance_radius}};
}

fs::path resolve(const std::string& given, const char* default_name, const char* what) {
    fs::path path = given;
    if (fs::is_directory(path)) path /= default_name;
    if (!fs::exists(path)) throw MissingArtifact(std::string(what) + " not found: " + path.string());
    return path;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError(std::string(what), "bad number '" + item + "'");
        }
    }
    if (out.empty()) throw CLI::ValidationError(std::string(what), "empty list");
    return out;
}

std::vector<ppg::SamplingPair> parse_pairs(const std::string& text) {
    std::vector<ppg::SamplingPair> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw CLI::ValidationError("--pairs", "expected delta_e:delta_p, got '" + item + "'");
        }
        const auto e = parse_list(item.substr(0, colon), "--pairs");
        const auto p = parse_list(item.substr(colon + 1), "--pairs");
        out.push_back({e.at(0), p.at(0)});
    }
    if (out.empty()) throw CLI::ValidationError("--pairs", "empty list");
    return out;
}

std::string period_tag(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%g", v);
    return buf.data();
}

// gen-data ------------------------------------------------------------------

struct GenDataArgs {
    Common common;
    ppg::DatasetConfig cfg;
};

int run_gen_data(GenDataArgs& a) {
    a.common.params.validate();
    a.cfg.validate();
    const fs::path out = prepare_out(a.common);
    const fs::path data_path = out / "dataset.csv";
    const fs::path manifest_path = out / "dataset.manifest.json";
    json manifest{{"command", "gen-data"},
                  {"params", params_json(a.common.params)},
                  {"config",
                   {{"angles", a.cfg.n_angles},
                    {"axis_seeds", a.cfg.n_axis_seeds},
                    {"dtau", a.cfg.dtau},
                    {"tau_max", a.cfg.tau_max},
                    {"cell", a.cfg.cell_size},
                    {"max_costate_scale", a.cfg.max_costate_scale}}},
                  {"status", "running"}};
    write_json(manifest_path, manifest);

    const ppg::Dataset data = ppg::build_dataset(a.common.params, a.cfg);
    ppg::write_dataset_csv(data, data_path);

    const ppg::GameParams& p = a.common.params;
    double axis_residual = 0.0;
    double hamiltonian_residual = 0.0;
    for (const auto& pt : data) {
        if (pt.state.x == 0.0 && pt.state.y <= 0.0) {
            const double exact = (p.surveillance_radius + pt.state.y) / (p.evader_speed - p.pursuer_speed);
            axis_residual = std::max(axis_residual, std::abs(pt.value - exact));
        }
        const ppg::Controls u = ppg::optimal_controls(pt.costate, pt.state);
        hamiltonian_residual =
            std::max(hamiltonian_residual, std::abs(ppg::hamiltonian(pt.state, pt.costate, u, p)));
    }
    manifest["status"] = "done";
    manifest["outputs"] = {{"dataset", data_path.filename().string()}};
    manifest["rows"] = data.size();
    manifest["dataset_hash"] = fnv1a_file(data_path);
    manifest["axis_residual_max"] = axis_residual;
    manifest["hamiltonian_residual_max"] = hamiltonian_residual;
    write_json(manifest_path, manifest);
    std::cout << "wrote " << data.size() << " points to " << data_path.string() << "\n";
    return 0;
}

// train ---------------------------------------------------------------------

struct TrainArgs {
    Common common;
    std::string data;
    ppg::TrainConfig cfg;
};

int run_train(TrainArgs& a) {
    a.cfg.validate();
    fs::path data_path = a.data;
    if (fs::is_directory(data_path)) data_path /= "dataset.csv";
    if (!fs::exists(data_path)) throw CLI::ValidationError("--data", "no data set at " + data_path.string());
    const fs::path out = prepare_out(a.common);
    const fs::path model_path = out / "model.json";
    const fs::path metrics_path = out / "train_metrics.json";
    const fs::path manifest_path = out / "train.manifest.json";
    json manifest{{"command", "train"},
                  {"dataset", data_path.string()},
                  {"dataset_hash", fnv1a_file(data_path)},
                  {"config",
                   {{"seed", a.cfg.seed},
                    {"lr", a.cfg.learning_rate},
                    {"batch", a.cfg.batch_size},
                    {"epochs", a.cfg.epochs},
                    {"sharpness", a.cfg.soft_sign_sharpness},
                    {"val_fraction", a.cfg.validation_fraction},
                    {"patience", a.cfg.patience}}},
                  {"status", "running"}};
    write_json(manifest_path, manifest);

    const ppg::Dataset data = ppg::read_dataset_csv(data_path);
    ppg::TrainReport report;
    const ppg::MlpModel model = ppg::train(data, a.cfg, &report);
    ppg::save_checkpoint(model, model_path,
                         {a.cfg.seed, report.final_train_loss, report.best_val_loss});
    const json metrics{{"initial_train_loss", report.initial_train_loss},
                       {"final_train_loss", report.final_train_loss},
                       {"train_loss_ratio", report.final_train_loss / report.initial_train_loss},
                       {"initial_val_loss", report.initial_val_loss},
                       {"best_val_loss", report.best_val_loss},
                       {"val_loss_ratio", report.best_val_loss / report.initial_val_loss},
                       {"epochs_run", report.epochs_run},
                       {"best_epoch", report.best_epoch},
                       {"train_size", report.train_size},
                       {"val_size", report.val_size}};
    write_json(metrics_path, metrics);
    manifest["status"] = "done";
    manifest["outputs"] = {{"checkpoint", model_path.filename().string()},
                           {"metrics", metrics_path.filename().string()}};
    manifest["checkpoint_hash"] = fnv1a_file(model_path);
    write_json(manifest_path, manifest);
    std::printf("mean loss %.6g -> %.6g (ratio %.4f), validation %.6g -> %.6g, %d epochs\n",
                report.initial_train_loss, report.final_train_loss,
                report.final_train_loss / report.initial_train_loss, report.initial_val_loss,
                report.best_val_loss, report.epochs_run);
    return 0;
}

// simulate ------------------------------------------------------------------

struct PolicyArgs {
    std::string mode = "network-direct";
    double axis_eps = 0.0;  // 0 selects the command's default
};

ppg::SelectionPolicy make_policy(const PolicyArgs& a, double default_eps) {
    ppg::SelectionPolicy policy{ppg::parse_selection_mode(a.mode),
                                a.axis_eps > 0.0 ? a.axis_eps : default_eps};
    policy.validate();
    return policy;
}

void add_policy(CLI::App* sub, PolicyArgs& a) {
    sub->add_option("--policy", a.mode, "network-direct | left-limit | right-limit | analytic-from-gradient")
        ->check(CLI::IsMember({"network-direct", "left-limit", "right-limit", "analytic-from-gradient"}));
    sub->add_option("--axis-eps", a.axis_eps, "axis proximity threshold of the selection policy")
        ->check(CLI::PositiveNumber);
}

json policy_json(const ppg::SelectionPolicy& p) {
    return {{"mode", std::string(ppg::to_string(p.mode))}, {"axis_eps", p.axis_epsilon}};
}

struct SimulateArgs {
    Common common;
    std::string model = "out";
    double x0 = 0.0;
    double y0 = 1.0;
    std::string pairs = "0.01:0.01,0.2:0.01,0.01:0.2,0.2:0.2";
    double dt = 1e-3;
    double t_max = 20.0;
    PolicyArgs policy;
};

int run_simulate(SimulateArgs& a) {
    a.common.params.validate();
    const auto pairs = parse_pairs(a.pairs);
    ppg::SampleHoldConfig base;
    base.dt = a.dt;
    base.t_max = a.t_max;
    base.policy = make_policy(a.policy, ppg::kClosedLoopAxisEpsilon);
    for (const auto& pair : pairs) {
        ppg::SampleHoldConfig cfg = base;
        cfg.evader_period = pair.evader_period;
        cfg.pursuer_period = pair.pursuer_period;
        cfg.validate();
    }
    const fs::path model_path = resolve(a.model, "model.json", "checkpoint");
    const fs::path out = prepare_out(a.common);
    const fs::path table_path = out / "game_times.csv";
    const fs::path manifest_path = out / "simulate.manifest.json";
    json manifest{{"command", "simulate"},
                  {"params", params_json(a.common.params)},
                  {"checkpoint", model_path.string()},
                  {"checkpoint_hash", fnv1a_file(model_path)},
                  {"x0", a.x0},
                  {"y0", a.y0},
                  {"pairs", a.pairs},
                  {"dt", a.dt},
                  {"t_max", a.t_max},
                  {"policy", policy_json(base.policy)},
                  {"status", "running"}};
    write_json(manifest_path, manifest);

    const ppg::MlpModel model = ppg::load_checkpoint(model_path);
    const ppg::State start{a.x0, a.y0};
    std::vector<ppg::GameTimeRow> rows;
    json trajectories = json::array();
    for (const auto& pair : pairs) {
        ppg::SampleHoldConfig cfg = base;
        cfg.evader_period = pair.evader_period;
        cfg.pursuer_period = pair.pursuer_period;
        const ppg::Trajectory tr = ppg::simulate(start, model, cfg, a.common.params);
        rows.push_back({pair, tr.game_time, tr.terminated});
        const std::string name = "trajectory_de" + period_tag(pair.evader_period) + "_dp" +
                                 period_tag(pair.pursuer_period) + ".csv";
        ppg::write_trajectory_csv(tr, out / name);
        trajectories.push_back(name);
        std::printf("delta_e=%-6g delta_p=%-6g T=%.4f%s\n", pair.evader_period,
                    pair.pursuer_period, tr.game_time, tr.terminated ? "" : " (horizon reached)");
    }
    ppg::write_game_time_csv(rows, table_path);
    json results = json::array();
    for (const auto& r : rows) {
        results.push_back({{"delta_e", r.pair.evader_period},
                           {"delta_p", r.pair.pursuer_period},
                           {"T", r.game_time},
                           {"terminated", r.terminated}});
    }
    manifest["status"] = "done";
    manifest["results"] = results;
    manifest["outputs"] = {{"table", table_path.filename().string()}, {"trajectories", trajectories}};
    write_json(manifest_path, manifest);
    return 0;
}

// gainloss ------------------------------------------------------------------

struct GainLossArgs {
    Common common;
    std::string model = "out";
    std::string deltas = "0.05,0.1,0.2";
    int res = 101;
    std::string value_source = "network";
    std::string data;
    PolicyArgs policy;
};

int run_gainloss(GainLossArgs& a) {
    a.common.params.validate();
    const auto deltas = parse_list(a.deltas, "--delta");
    for (double d : deltas) {
        if (!(d > 0.0)) throw CLI::ValidationError("--delta", "hold durations must be positive");
    }
    ppg::GainLossConfig cfg;
    cfg.policy = make_policy(a.policy, ppg::SelectionPolicy{}.axis_epsilon);
    cfg.validate();
    const fs::path model_path = resolve(a.model, "model.json", "checkpoint");
    const ppg::MlpModel model = ppg::load_checkpoint(model_path);
    const std::string checkpoint_hash = fnv1a_file(model_path);

    ppg::ValueFunction value = ppg::model_value(model, a.common.params);
    std::string data_hash;
    if (a.value_source == "data") {
        const fs::path data_path = resolve(a.data.empty() ? "out" : a.data, "dataset.csv", "dataset");
        data_hash = fnv1a_file(data_path);
        value = ppg::NearestNeighbourValue(ppg::read_dataset_csv(data_path), a.common.params);
    }
    const fs::path out = prepare_out(a.common);
    for (double delta : deltas) {
        const std::string stem = "gainloss_delta" + period_tag(delta);
        json sidecar{{"command", "gainloss"},
                     {"params", params_json(a.common.params)},
                     {"delta", delta},
                     {"res", a.res},
                     {"checkpoint", model_path.string()},
                     {"checkpoint_hash", checkpoint_hash},
                     {"value_source", a.value_source},
                     {"policy", policy_json(cfg.policy)},
                     {"status", "running"}};
        if (!data_hash.empty()) sidecar["dataset_hash"] = data_hash;
        write_json(out / (stem + ".json"), sidecar);
        const ppg::GainLossField field =
            ppg::compute_field(delta, a.res, model, value, a.common.params, cfg);
        ppg::write_field_csv(field, a.common.params, out / (stem + ".csv"));
        double gain = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < field.mask.size(); ++i) {
            if (!field.mask[i]) continue;
            gain = std::max(gain, field.value[i] - field.v_min[i]);
            loss = std::max(loss, field.v_max[i] - field.value[i]);
        }
        sidecar["status"] = "done";
        sidecar["field"] = stem + ".csv";
        sidecar["max_evader_gain"] = gain;
        sidecar["max_pursuer_gain"] = loss;
        write_json(out / (stem + ".json"), sidecar);
        std::printf("delta=%g: %s.csv (max evader gain %.4f, max pursuer gain %.4f)\n", delta,
                    stem.c_str(), gain, loss);
    }
    return 0;
}

// render --------------------------------------------------------------------

struct RenderArgs {
    Common common;
    std::string field = "value";
    std::string model = "out";
    std::string input;
    std::vector<std::string> trajectories;
    int res = 101;
    std::string output;
};

int run_render(RenderArgs& a) {
    a.common.params.validate();
    std::vector<ppg::Polyline> overlays;
    for (const auto& t : a.trajectories) {
        if (!fs::exists(t)) throw MissingArtifact("trajectory not found: " + t);
        overlays.push_back({ppg::read_trajectory_csv(t, a.common.params).states, fs::path(t).stem().string()});
    }
    ppg::Heatmap heatmap;
    if (a.field == "value" || a.field == "evader" || a.field == "pursuer") {
        const fs::path model_path = resolve(a.model, "model.json", "checkpoint");
        heatmap = ppg::model_heatmap(ppg::load_checkpoint(model_path), ppg::parse_model_field(a.field),
                                     a.res, a.common.params);
    } else if (a.field == "vmin" || a.field == "vmax" || a.field == "gain" || a.field == "loss") {
        if (a.input.empty()) throw CLI::ValidationError("--input", "a gain/loss field file is required");
        if (!fs::exists(a.input)) throw MissingArtifact("field file not found: " + a.input);
        std::ifstream in(a.input);
        std::string line;
        std::getline(in, line);
        if (line != "x,y,vmin,vmax,v") throw ppg::FormatError(a.input + ": not a gain/loss field file");
        std::vector<std::array<double, 3>> samples;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::array<double, 5> r{};
            std::stringstream ss(line);
            std::string f;
            for (double& v : r) {
                if (!std::getline(ss, f, ',')) throw ppg::FormatError(a.input + ": short row");
                v = std::stod(f);
            }
            const double shown = a.field == "vmin"   ? r[2]
                                 : a.field == "vmax" ? r[3]
                                 : a.field == "gain" ? r[4] - r[2]
                                                     : r[3] - r[4];
            samples.push_back({r[0], r[1], shown});
        }
        // The row through the centre holds every x coordinate of the grid.
        std::set<double> xs;
        for (const auto& sample : samples) xs.insert(sample[0]);
        const int res = static_cast<int>(xs.size());
        heatmap = ppg::grid_heatmap(samples, res, a.common.params, a.field);
    } else if (a.field == "none") {
        heatmap.title = "trajectories";
    } else {
        throw CLI::ValidationError("--field", "unknown field '" + a.field + "'");
    }
    const fs::path out = prepare_out(a.common);
    const fs::path svg_path = out / (a.output.empty() ? a.field + ".svg" : a.output);
    ppg::write_text_file(svg_path, ppg::render_svg(heatmap, overlays, a.common.params));
    std::cout << "wrote " << svg_path.string() << "\n";
    return 0;
}

// configuration file ----------------------------------------------------------

/// Reads `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError("--config", path.string() + ":" + std::to_string(lineno) +
                                                       ": expected key = value");
        }
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

/// Splits off `--config FILE` and appends its entries as flags for every
/// option of the chosen subcommand not given on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
    std::vector<std::string> kept;
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw CLI::ValidationError("--config", "missing file name");
            config = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (config.empty() || kept.empty()) return kept;
    CLI::App* sub = app.get_subcommand_no_throw(kept.front());
    if (sub == nullptr) return kept;
    std::set<std::string> given;
    for (const auto& a : kept) {
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));
    }
    for (const auto& [key, value] : read_config(config)) {
        if (given.count(key) != 0) continue;
        if (sub->get_option_no_throw("--" + key) == nullptr) continue;
        kept.push_back("--" + key);
        kept.push_back(value);
    }
    return kept;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surveillance-evasion game pipeline: data, training, closed loop, gain/loss, plots"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ppg 1.0");
    app.footer("Options may also come from a `key = value` file given with --config FILE;\n"
               "flags on the command line win. Outputs go to --out, else $PPG_OUT_DIR, else ./out.");

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate the characteristic data set");
    add_common(gen_cmd, gen.common);
    gen_cmd->add_option("--angles", gen.cfg.n_angles, "terminal angles on the usable arc (x >= 0)");
    gen_cmd->add_option("--axis-seeds", gen.cfg.n_axis_seeds, "seeds per y-axis segment");
    gen_cmd->add_option("--dtau", gen.cfg.dtau, "retrograde step");
    gen_cmd->add_option("--tau-max", gen.cfg.tau_max, "retrograde horizon");
    gen_cmd->add_option("--cell", gen.cfg.cell_size, "envelope cell size");
    gen_cmd->add_option("--max-costate", gen.cfg.max_costate_scale, "largest terminal costate scale");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "train the network on a data set");
    add_common(train_cmd, tr.common);
    train_cmd->add_option("--data", tr.data, "data set file or directory holding dataset.csv")
        ->required()
        ->check(CLI::ExistingPath);
    train_cmd->add_option("--seed", tr.cfg.seed, "initialization and shuffling seed");
    train_cmd->add_option("--lr", tr.cfg.learning_rate, "Adam step size");
    train_cmd->add_option("--batch", tr.cfg.batch_size, "mini-batch size");
    train_cmd->add_option("--epochs", tr.cfg.epochs, "maximal number of epochs");
    train_cmd->add_option("--sharpness", tr.cfg.soft_sign_sharpness, "soft-sign sharpness");
    train_cmd->add_option("--val-fraction", tr.cfg.validation_fraction, "validation share");
    train_cmd->add_option("--patience", tr.cfg.patience, "epochs without improvement before stopping");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "sample-and-hold game times from one start");
    add_common(sim_cmd, sim.common);
    sim_cmd->add_option("--model", sim.model, "checkpoint file or directory holding model.json");
    sim_cmd->add_option("--x0", sim.x0, "initial x");
    sim_cmd->add_option("--y0", sim.y0, "initial y");
    sim_cmd->add_option("--pairs", sim.pairs, "comma-separated delta_e:delta_p pairs");
    sim_cmd->add_option("--dt", sim.dt, "integrator step");
    sim_cmd->add_option("--t-max", sim.t_max, "simulation horizon");
    add_policy(sim_cmd, sim.policy);

    GainLossArgs gl;
    auto* gl_cmd = app.add_subcommand("gainloss", "one-hold gain/loss fields on a grid");
    add_common(gl_cmd, gl.common);
    gl_cmd->add_option("--model", gl.model, "checkpoint file or directory holding model.json");
    gl_cmd->add_option("--delta", gl.deltas, "comma-separated hold durations");
    gl_cmd->add_option("--res", gl.res, "grid points per side")->check(CLI::Range(11, 2001));
    gl_cmd->add_option("--value-source", gl.value_source, "network | data (nearest data point)")
        ->check(CLI::IsMember({"network", "data"}));
    gl_cmd->add_option("--data", gl.data, "data set for --value-source data");
    add_policy(gl_cmd, gl.policy);

    RenderArgs rd;
    auto* rd_cmd = app.add_subcommand("render", "SVG heatmaps and trajectory overlays");
    add_common(rd_cmd, rd.common);
    rd_cmd->add_option("--field", rd.field, "value | evader | pursuer | vmin | vmax | gain | loss | none");
    rd_cmd->add_option("--model", rd.model, "checkpoint for network fields");
    rd_cmd->add_option("--input", rd.input, "gain/loss field CSV for vmin/vmax/gain/loss");
    rd_cmd->add_option("--trajectory", rd.trajectories, "trajectory CSV to overlay (repeatable)");
    rd_cmd->add_option("--res", rd.res, "grid points per side for network fields")
        ->check(CLI::Range(2, 2001));
    rd_cmd->add_option("--output", rd.output, "file name inside the output directory");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(args, app);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    try {
        if (gen_cmd->parsed()) return run_gen_data(gen);
        if (train_cmd->parsed()) return run_train(tr);
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (gl_cmd->parsed()) return run_gainloss(gl);
        if (rd_cmd->parsed()) return run_render(rd);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ppg::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
