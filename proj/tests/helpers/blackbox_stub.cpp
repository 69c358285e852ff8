// Test blackbox speaking the line protocol: reads one line of space-separated
// decimals, writes one decimal. Behaviour is selected by argv[1]:
//   sum         reply with the sum of the inputs
//   sphere      reply with the squared l2 norm
//   nan         reply "nan"
//   garbage     reply "hello"
//   sleep MS    sleep MS milliseconds before each reply
//   exit-after N  behave like sum for N requests, then exit
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "sum";
  const long arg = argc > 2 ? std::atol(argv[2]) : 0;
  long served = 0;

  std::string line;
  while (std::getline(std::cin, line)) {
    std::istringstream is(line);
    std::vector<double> x;
    double v;
    while (is >> v) x.push_back(v);

    if (mode == "sleep" && arg > 0) usleep(static_cast<useconds_t>(arg) * 1000);

    if (mode == "nan") {
      std::printf("nan\n");
    } else if (mode == "garbage") {
      std::printf("hello\n");
    } else if (mode == "sphere") {
      double s = 0.0;
      for (double c : x) s += c * c;
      std::printf("%.17g\n", s);
    } else {  // sum / sleep / exit-after
      double s = 0.0;
      for (double c : x) s += c;
      std::printf("%.17g\n", s);
    }
    std::fflush(stdout);

    ++served;
    if (mode == "exit-after" && served >= arg) return 0;
  }
  return 0;
}
