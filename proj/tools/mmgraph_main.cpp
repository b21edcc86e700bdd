#include <string>
#include <vector>

#include <mmg/cli.hpp>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return mmg::run_cli(std::move(args));
}
