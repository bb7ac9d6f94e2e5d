#include <vector>
#include <string>

#include "actmedia/cli.hpp"

int main(int argc, char** argv) {
    return actmedia::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
