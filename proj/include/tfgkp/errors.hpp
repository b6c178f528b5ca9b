#ifndef TFGKP_ERRORS_HPP
#define TFGKP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tfgkp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define TFGKP_ERROR(Name)                 \
    class Name : public Error {           \
    public:                               \
        using Error::Error;               \
    };

TFGKP_ERROR(NonPositiveWidth)
TFGKP_ERROR(GridTooNarrow)
TFGKP_ERROR(GridMismatch)
TFGKP_ERROR(WrongDomain)
TFGKP_ERROR(DegenerateBasis)
TFGKP_ERROR(NonConvergence)
TFGKP_ERROR(GridTooCoarse)
TFGKP_ERROR(NonMonochromatic)
TFGKP_ERROR(InvalidArgument)
TFGKP_ERROR(ConfigError)
TFGKP_ERROR(IoError)

#undef TFGKP_ERROR

} // namespace tfgkp

#endif
