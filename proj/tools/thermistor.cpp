#include "thermistor/driver.hpp"

#include <iostream>

int main(int argc, char** argv) { return thermistor::run_cli(argc, argv, std::cout, std::cerr); }
