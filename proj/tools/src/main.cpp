#include "igk_tools/commands.hpp"

int main(int argc, char** argv) { return igk::tools::run(argc, argv); }
