#pragma once

#include <doctest.h>

#include "kc/error.hpp"

// Checks that `expr` throws kc::Error carrying `error_code`.
#define CHECK_KC_ERROR(expr, error_code)                          \
  do {                                                            \
    bool kc_thrown_ = false;                                      \
    try {                                                         \
      (void)(expr);                                               \
    } catch (const kc::Error& kc_e_) {                            \
      kc_thrown_ = true;                                          \
      CHECK_MESSAGE(kc_e_.code() == (error_code), kc_e_.what());  \
    }                                                             \
    CHECK_MESSAGE(kc_thrown_, "no kc::Error from " #expr);        \
  } while (0)
