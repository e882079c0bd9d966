#pragma once

#include <stdexcept>
#include <string>

namespace isohull {

/// Argument outside an operation's domain (bad dimension, m <= n, alpha > 1, ...).
class domain_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Input that is valid but geometrically degenerate: points that do not span,
/// near-coplanar facets, or a covariance that is not positive definite.
class degenerate_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A computed object failed its own invariants.
class numerical_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class config_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

class io_error : public std::runtime_error
{
public:
    io_error(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path)
    {
    }

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace isohull
