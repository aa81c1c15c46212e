// sausagelab command line: run experiments, validate configs, merge reports.
//
//   sausagelab run <config-file>
//   sausagelab validate <config-file>
//   sausagelab report <results-dir>
//
// Exit codes: 0 success, 2 invalid config, 3 numerical failure,
// 4 inconclusive-only results.

#include <cstring>
#include <iostream>

#include "sausagelab/cli.hpp"
#include "sausagelab/estimate.hpp"

namespace {

void usage() {
    std::cerr << "usage: sausagelab run <config-file>\n"
              << "       sausagelab validate <config-file>\n"
              << "       sausagelab report <results-dir>\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        usage();
        return 2;
    }
    const std::string verb = argv[1];
    const std::string arg = argv[2];
    try {
        if (verb == "validate") {
            sausagelab::validate_config(sausagelab::parse_config_file(arg));
            std::cout << "ok\n";
            return 0;
        }
        if (verb == "run") {
            const auto manifest = sausagelab::run(sausagelab::parse_config_file(arg));
            for (const auto& f : manifest.failures) std::cerr << "failure: " << f << "\n";
            std::cout << "wrote " << manifest.out_dir << " (" << manifest.files.size()
                      << " files)\n";
            if (manifest.inconclusive_only) return 4;
            return 0;
        }
        if (verb == "report") {
            return sausagelab::report(arg);
        }
        usage();
        return 2;
    } catch (const sausagelab::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const sausagelab::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
