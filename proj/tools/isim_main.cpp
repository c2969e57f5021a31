#include "isim/cli.hpp"

int main(int argc, char** argv) { return isim::cli_main(argc, argv); }
