#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace panelmed {

/// Base of every library error. Data errors come from bad inputs; numerical
/// errors come from estimation on degenerate data.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class DuplicateKey : public DataError {
public:
    explicit DuplicateKey(std::vector<std::pair<std::string, int>> keys);
    const std::vector<std::pair<std::string, int>>& keys() const noexcept { return keys_; }

private:
    std::vector<std::pair<std::string, int>> keys_;
};

class UnknownVariable : public DataError {
public:
    explicit UnknownVariable(std::string name)
        : DataError("unknown variable: " + name), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class SchemaMismatch : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t row, std::string column, const std::string& detail)
        : DataError("parse error at row " + std::to_string(row) + ", column " + column + ": " +
                    detail),
          row_(row), column_(std::move(column)) {}
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

class EmptyDataset : public DataError {
public:
    EmptyDataset() : DataError("dataset is empty") {}
};

class InvalidArgument : public DataError {
public:
    using DataError::DataError;
};

class GroupTooSmall : public NumericalError {
public:
    GroupTooSmall(int year, const std::string& variable)
        : NumericalError("winsorization group too small: year " + std::to_string(year) +
                         ", variable " + variable),
          year_(year), variable_(variable) {}
    int year() const noexcept { return year_; }
    const std::string& variable() const noexcept { return variable_; }

private:
    int year_;
    std::string variable_;
};

class ZeroVariance : public NumericalError {
public:
    explicit ZeroVariance(const std::string& variable)
        : NumericalError("zero variance: " + variable), variable_(variable) {}
    const std::string& variable() const noexcept { return variable_; }

private:
    std::string variable_;
};

class InsufficientObservations : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class AllColumnsAliased : public NumericalError {
public:
    AllColumnsAliased() : NumericalError("every design column is aliased") {}
};

class ZeroTotalEffect : public NumericalError {
public:
    ZeroTotalEffect() : NumericalError("total effect is zero; mediation ratio undefined") {}
};

}  // namespace panelmed
