#pragma once

#include <gtest/gtest.h>

#include "ontoforge/error.hpp"

#define EXPECT_ERRC(stmt, errc)                                                          \
  do {                                                                                   \
    try {                                                                                \
      stmt;                                                                              \
      ADD_FAILURE() << "expected " << ontoforge::errc_name(errc) << ", nothing thrown";  \
    } catch (const ontoforge::Error& e_) {                                               \
      EXPECT_EQ(ontoforge::errc_name(e_.code()), ontoforge::errc_name(errc)) << e_.what(); \
    }                                                                                    \
  } while (0)
