#include <pybind11/pybind11.h>
PYBIND11_MODULE(_orrecon, m) { m.doc() = "placeholder"; }
