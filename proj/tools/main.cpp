#include <vector>

#include <hawkes/cli.hpp>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return hawkes::run_cli(std::move(args));
}
