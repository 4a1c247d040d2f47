#include "perflens/server.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"perflens JSON-RPC server", "perflens-server"};
    bool stdio = false;
    std::string root = ".";
    unsigned workers = 4;
    app.add_flag("--stdio", stdio, "Serve JSON-RPC over stdin/stdout")->required();
    app.add_option("--root", root, "Workspace root")->check(CLI::ExistingDirectory);
    app.add_option("--workers", workers, "Threads for read requests")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    std::ios::sync_with_stdio(false);
    perflens::server::ServerCore core(std::filesystem::absolute(root), {});
    return perflens::server::serve_stdio(core, std::cin, std::cout, workers);
}
