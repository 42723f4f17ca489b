/*
* Copyright (C) 2026 gravepi contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace gravepi {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension or shape mismatch, empty inputs where at least one element is required.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// A value lies outside its mathematical domain (negative state, bad coordinate, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Non-finite values appeared while integrating.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(double time, const std::string& what)
        : Error("numerical blowup at t=" + std::to_string(time) + ": " + what)
        , time_(time)
    {
    }
    double time() const noexcept { return time_; }

private:
    double time_;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Two distinct patches share a location, so their distance is zero.
class DegenerateDistance : public Error {
public:
    using Error::Error;
};

/// A gravity weight overflowed to a non-finite value.
class OverflowError : public Error {
public:
    OverflowError(std::size_t row, std::size_t col, const std::string& what)
        : Error(what)
        , row_(row)
        , col_(col)
    {
    }
    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Every iteration of a fit failed.
class AllFailed : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what)
        , line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class VocabularyError : public ParseError {
public:
    using ParseError::ParseError;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

/// Case counts reference a province that was neither mapped to a patch nor dropped.
class UnmappedData : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class IllConditioned : public Error {
public:
    using Error::Error;
};

} // namespace gravepi
