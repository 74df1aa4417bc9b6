// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#include <cstdio>

#include "coopnet/coopnet.hpp"

int main() {
  std::printf("coopnet cli placeholder\n");
  return 0;
}
