#ifndef EMDICT_ERRORS_HPP_
#define EMDICT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace emdict {

struct capacity_exhausted : std::runtime_error {
    explicit capacity_exhausted(const std::string& what) : std::runtime_error(what) {}
};

struct invalid_page : std::runtime_error {
    explicit invalid_page(const std::string& what) : std::runtime_error(what) {}
};

struct size_mismatch : std::runtime_error {
    explicit size_mismatch(const std::string& what) : std::runtime_error(what) {}
};

struct bad_parameters : std::runtime_error {
    explicit bad_parameters(const std::string& what) : std::runtime_error(what) {}
};

/// A gadget exceeded its element capacity; the owner must rebuild it
/// (typically with a fresh hash seed).
struct needs_rebuild : std::runtime_error {
    explicit needs_rebuild(const std::string& what) : std::runtime_error(what) {}
};

/// The dictionary cannot accept more live keys at its configured n_max.
struct dictionary_full : std::runtime_error {
    explicit dictionary_full(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace emdict

#endif  // EMDICT_ERRORS_HPP_
