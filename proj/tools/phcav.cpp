#include "phcav/cli.hpp"

int main(int argc, char **argv)
{
    return phcav::cli::run_cli(argc, argv);
}
