#pragma once

// JSON encodings of the domain types. Complex numbers are [re, im] pairs (a
// bare number is accepted on input); non-finite reals are written as the
// strings "inf", "-inf" and "nan" since JSON has no literal for them.

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "specgate/operators.hpp"
#include "specgate/resolvent.hpp"
#include "specgate/semigroup.hpp"
#include "specgate/seqspace.hpp"

namespace specgate::io {

using json = nlohmann::json;

/// Throws ValidationError naming the first key of j outside `allowed`.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& path);

json number(double v);
double real_from_json(const json& j, const std::string& path);
std::size_t count_from_json(const json& j, const std::string& path);

json to_json(cplx z);
cplx complex_from_json(const json& j, const std::string& path);

json to_json(const seqspace::ComplexSeq& a);
seqspace::ComplexSeq complex_seq_from_json(const json& j, const std::string& path);

json to_json(const seqspace::NonNegSeq& f);
/// Either a bare array or {"entries": [...], "tail_bound": t}.
seqspace::NonNegSeq nonneg_seq_from_json(const json& j, const std::string& path);

json to_json(const seqspace::Gauge& g);
seqspace::Gauge gauge_from_json(const json& j, const std::string& path);

json to_json(const operators::OperatorSpec& t);
operators::OperatorSpec operator_from_json(const json& j, const std::string& path);

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& path);

json to_json(const seqspace::GoverningCertificate& c);
json to_json(const resolvent::StabilityReport& r);
json to_json(const resolvent::ResolventProbe& p);
json to_json(const resolvent::LowerBoundRecord& r);
json to_json(const semigroup::StripCertificate& c);
json to_json(const semigroup::SemigroupReport& r);

}  // namespace specgate::io
