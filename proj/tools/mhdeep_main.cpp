#include "mhdeep/cli.hpp"

int main(int argc, char** argv) {
    return mhdeep::cli::run(argc, argv);
}
