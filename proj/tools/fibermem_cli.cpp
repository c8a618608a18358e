// Command-line driver: fibermem run <config> [--out DIR] [--max-oc N] [--max-rot N] [--eta X] [--quiet]

#include <iostream>

#include "CLI11.hpp"

#include "fibermem/config.hpp"
#include "fibermem/errors.hpp"
#include "fibermem/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Fiber-reinforced membrane stiffness optimization"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int max_oc = 0;
    int max_rot = 0;
    double eta = 0.0;
    bool quiet = false;

    auto* run_cmd = app.add_subcommand("run", "Optimize the problem described by a config file");
    run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    auto* out_opt = run_cmd->add_option("--out", out_dir, "Output directory");
    auto* oc_opt = run_cmd->add_option("--max-oc", max_oc, "Maximum OC updates")->check(CLI::PositiveNumber);
    auto* rot_opt =
        run_cmd->add_option("--max-rot", max_rot, "Maximum fiber rotation updates")->check(CLI::PositiveNumber);
    auto* eta_opt = run_cmd->add_option("--eta", eta, "OC damping exponent in (0, 1]");
    run_cmd->add_flag("--quiet", quiet, "Suppress progress output");

    CLI11_PARSE(app, argc, argv);

    try {
        fibermem::RunConfig config = fibermem::load_config(config_path);
        if (*out_opt) config.output.directory = out_dir;
        if (*oc_opt) config.settings.max_oc_iters = max_oc;
        if (*rot_opt) config.settings.max_rotation_updates = max_rot;
        if (*eta_opt) config.settings.eta = eta;
        config.validate();
        const int code = fibermem::run(config, quiet ? nullptr : &std::cout);
        if (code == fibermem::kNotConverged && !quiet)
            std::cerr << "warning: optimization did not converge; artifacts written\n";
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fibermem::kError;
    }
}
