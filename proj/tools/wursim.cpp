#include "wursim/cli_io.hpp"

int main(int argc, char** argv) { return wursim::cli_main(argc, argv); }
