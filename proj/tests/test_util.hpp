#pragma once

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "kslab/error.hpp"

template <class F>
kslab::ErrorKind kind_of(F&& f)
{
    try {
        f();
    } catch (const kslab::Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected kslab::Error";
    return kslab::ErrorKind::internal;
}

inline double rel_err(double got, double want)
{
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}
