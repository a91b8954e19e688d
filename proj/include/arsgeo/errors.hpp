#pragma once

#include <stdexcept>
#include <string>

namespace arsgeo {

// Error classes map onto CLI exit codes: input=2, numeric=3, io=4.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation outside the mathematical domain of an expression (log(-1), 1/0, ...).
struct expr_domain_error : numeric_error {
    using numeric_error::numeric_error;
};

// A trajectory left its chart rectangle; carries the exit time.
struct chart_exit_error : numeric_error {
    double exit_time;
    chart_exit_error(const std::string& msg, double t)
        : numeric_error(msg), exit_time(t) {}
};

// Operation requested at (or too close to) the singular locus.
struct singular_point_error : numeric_error {
    using numeric_error::numeric_error;
};

} // namespace arsgeo
