#include "autostream/cli.hpp"

int main(int argc, char** argv) { return autostream::cli_main(argc, argv); }
