#include <string>
#include <vector>

#include "mlisim/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return mlisim::run_cli(args);
}
