#include <vector>

#include "aptshield/cli.hpp"

int main(int argc, char** argv) {
    return aptshield::cli::run_command({argv + 1, argv + argc});
}
