#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "qwalk/runner.hpp"

namespace {

void usage() {
    std::cerr << "usage: qwalk-action <config-path> [--override key=value ...]\n"
                 "\n"
                 "Config is a flat key=value file ('#' starts a comment). Keys:\n"
                 "  experiment    simulate|conserve|extended|lorentz|continuum|mechanics\n"
                 "  n_sites       even integer >= 4 (default 64)\n"
                 "  steps         integer >= 1 (default 32)\n"
                 "  coin          identity|hadamard|random:<seed>|random_site:<seed>\n"
                 "  initial_state delta:<p>|plane_wave:<mode>|gaussian:<c>:<w>|random:<seed>\n"
                 "  rapidity, lambda, mass, wavenumber, t_final, solver_tol, epsilon_list,\n"
                 "  output_path\n"
                 "\n"
                 "QWALK_THREADS caps internal parallelism. Exit codes: 0 all assertions\n"
                 "pass, 1 assertion failure, 2 usage or configuration error.\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        usage();
        return 2;
    }
    const std::string config_path = argv[1];
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot read config file '" << config_path << "'\n";
        return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    try {
        qwalk::RunSpec spec = qwalk::parse_config(buf.str());
        for (int i = 2; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg != "--override" || i + 1 >= argc) {
                usage();
                return 2;
            }
            const std::string kv = argv[++i];
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --override expects key=value, got '" << kv << "'\n";
                return 2;
            }
            qwalk::apply_config_entry(spec, kv.substr(0, eq), kv.substr(eq + 1), 0);
        }
        qwalk::validate_spec(spec);
        return qwalk::run(spec);
    } catch (const qwalk::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
