#include <iostream>

#include "aoii/cli.hpp"

int main(int argc, char** argv) { return aoii::run_cli(argc, argv, std::cout, std::cerr); }
