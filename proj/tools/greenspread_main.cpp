#include "greenspread/cli.hpp"

int main(int argc, char** argv) { return greenspread::cli_main(argc, argv); }
