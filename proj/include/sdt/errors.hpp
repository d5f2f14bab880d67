#pragma once

#include <stdexcept>
#include <string>

namespace sdt {

// Root of every error raised by the library. Subclasses carry the category;
// the message carries the context (offending index, state, field, ...).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SDT_DEFINE_ERROR(Name) \
    struct Name : Error {      \
        using Error::Error;    \
    }

SDT_DEFINE_ERROR(DomainError);        // basis function evaluated outside its domain
SDT_DEFINE_ERROR(ModelInvalidError);  // corrupt tree reached during routing
SDT_DEFINE_ERROR(ParseError);         // malformed document
SDT_DEFINE_ERROR(DimensionError);     // inconsistent sizes
SDT_DEFINE_ERROR(NumericalError);     // solver breakdown
SDT_DEFINE_ERROR(IndexError);         // bad feature/node index
SDT_DEFINE_ERROR(ConfigError);        // degenerate or inconsistent configuration
SDT_DEFINE_ERROR(IntegralityError);   // binary value too far from {0,1}
SDT_DEFINE_ERROR(StructureError);     // tree-structure constraints violated
SDT_DEFINE_ERROR(IoError);
SDT_DEFINE_ERROR(ConvergenceError);
SDT_DEFINE_ERROR(ControllerError);
SDT_DEFINE_ERROR(PreconditionError);
SDT_DEFINE_ERROR(ProvenanceError);    // artifacts built from different inputs

#undef SDT_DEFINE_ERROR

}  // namespace sdt
