#include "mobch/cli.hpp"

int main(int argc, char** argv) {
    return mobch::cli::dispatch(argc, argv);
}
